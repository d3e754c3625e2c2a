"""Exception hierarchy shared by all chainforge modules.

Every error carries the process exit code the command-line front-end
reports for it, so the codes stay a stable interface.
"""
from typing import Optional, Tuple

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SYNTAX = 2
EXIT_SEMANTIC = 3
EXIT_INFEASIBLE = 4
EXIT_TIME_LIMIT = 5


class ChainforgeError(Exception):
    """Base class for all domain errors."""

    exit_code = EXIT_FAILURE


class SchemaError(ChainforgeError):
    """An input file does not match its schema."""

    exit_code = EXIT_SEMANTIC

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field {field}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.field = field
        self.line = line


class ModelValidationError(ChainforgeError):
    """A loaded object violates one of its type invariants."""

    exit_code = EXIT_SEMANTIC


class CrossReferenceError(ChainforgeError):
    """A request references a function or node that does not exist."""

    exit_code = EXIT_SEMANTIC


class _PositionedError(ChainforgeError):
    def __init__(self, message: str, position: Tuple[int, int]):
        line, column = position
        super().__init__(f"{message} at line {line}, column {column}")
        self.position = position


class ChainLexError(_PositionedError):
    """A character outside the chaining language alphabet."""

    exit_code = EXIT_SYNTAX


class ChainSyntaxError(_PositionedError):
    """A token sequence not derivable from the chaining grammar."""

    exit_code = EXIT_SYNTAX

    def __init__(self, message: str, position: Tuple[int, int], expected: str):
        super().__init__(f"{message}, expected {expected}", position)
        self.expected = expected


class ChainSemanticError(_PositionedError):
    """A well-formed chain that references undeclared symbols."""

    exit_code = EXIT_SEMANTIC


class ExpansionError(ChainforgeError):
    """A chain cannot be expanded into a VNF graph."""

    exit_code = EXIT_SEMANTIC


class BuildError(ChainforgeError):
    """The placement model cannot be built from its inputs."""

    exit_code = EXIT_SEMANTIC


class SolutionImportError(ChainforgeError):
    """An external solution file does not fit the instance."""

    exit_code = EXIT_SEMANTIC


class RangeEstimationError(ChainforgeError):
    """A single-objective run of the range estimation is infeasible."""

    exit_code = EXIT_INFEASIBLE


class RankingError(ChainforgeError):
    """Results optimized for different objectives cannot be ranked together."""
