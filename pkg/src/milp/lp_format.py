"""CPLEX LP export of placement instances and import of external solutions."""
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from src.config import get_config
from src.errors import SchemaError, SolutionImportError
from src.milp.checker import check_solution
from src.milp.instance import LinearConstraint, Objective, PlacementInstance, Relation, Sense
from src.milp.solution import PlacementSolution, extract_solution
from src.model.numbers import format_rational

logger = logging.getLogger(__name__)

TERMS_PER_LINE = 8


BOUND_ROW_SUFFIXES = ("~lo", "~up")


def _lcm(values) -> int:
    scale = 1
    for d in values:
        scale = scale * d // math.gcd(scale, d)
    return scale


def scaled_row(row: LinearConstraint) -> Tuple[Dict[int, int], int]:
    """Multiply a row by the LCM of its denominators so all coefficients are integers."""
    scale = _lcm([c.denominator for c, _ in row.terms] + [row.rhs.denominator])
    terms = {var: int(coef * scale) for coef, var in row.terms}
    return terms, int(row.rhs * scale)


def _is_decimal(value: Fraction) -> bool:
    return "/" not in format_rational(value)


def _number(value: Fraction) -> str:
    """Exact decimal text; callers scale anything that has no finite decimal form."""
    if not _is_decimal(value):
        raise ValueError(f"{value} has no exact decimal form")
    return format_rational(value)


def _terms_text(terms: List[Tuple[object, str]]) -> List[str]:
    chunks = []
    for index, (coef, name) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        magnitude = abs(coef)
        if index == 0:
            sign = "-" if coef < 0 else ""
        body = name if magnitude == 1 else f"{_number(Fraction(magnitude))} {name}"
        chunks.append(f"{sign} {body}".strip() if sign else body)
    lines = []
    for start in range(0, len(chunks), TERMS_PER_LINE):
        lines.append("   " + " ".join(chunks[start:start + TERMS_PER_LINE]))
    return lines


def export_lp(instance: PlacementInstance, objective: Objective, path: Union[str, Path]) -> Path:
    """Write the instance in CPLEX LP format with one objective selected.

    Args:
        instance: Built placement instance
        objective: Which of the three metrics to optimize
        path: Output file

    Returns:
        The written path
    """
    objective = Objective(objective)
    names = [v.name for v in instance.variables]
    lines = ["\\ Placement instance", f"\\ Objective {objective.value}"]
    coefficients = instance.objectives[objective]
    scale = 1
    if not all(_is_decimal(coef) for coef in coefficients.values()):
        # A positive multiple leaves the optimal placement unchanged.
        scale = _lcm(Fraction(coef).denominator for coef in coefficients.values())
        lines.append(f"\\ Objective scale {scale}")
    lines.append("Maximize" if objective.sense is Sense.MAX else "Minimize")
    obj_terms = [(coef * scale, names[var]) for var, coef in coefficients.items()]
    lines.append(" obj:")
    if obj_terms:
        lines.extend(_terms_text(obj_terms))
    else:
        lines.append(f"   0 {names[0]}")

    lines.append("Subject To")
    for row in instance.constraints:
        terms, rhs = scaled_row(row)
        text_terms = [(coef, names[var]) for var, coef in terms.items()]
        if not text_terms:
            text_terms = [(0, names[0])]
        lines.append(f" {row.name}:")
        body = _terms_text(text_terms)
        body[-1] += f" {row.relation.value} {rhs}"
        lines.extend(body)

    # Bounds without a finite decimal form become integer rows; the Bounds
    # section then carries the enclosing integers.
    bounds = []
    for var in instance.variables:
        if var.is_binary:
            continue
        lb, ub = var.lb, var.ub
        if not _is_decimal(lb):
            lines.append(f" {var.name}~lo:")
            lines.append(f"   {lb.denominator} {var.name} >= {lb.numerator}")
            lb = Fraction(math.floor(lb))
        if ub is not None and not _is_decimal(ub):
            lines.append(f" {var.name}~up:")
            lines.append(f"   {ub.denominator} {var.name} <= {ub.numerator}")
            ub = Fraction(math.ceil(ub))
        if ub is None:
            bounds.append(f" {var.name} >= {_number(lb)}")
        else:
            bounds.append(f" {_number(lb)} <= {var.name} <= {_number(ub)}")

    lines.append("Bounds")
    lines.extend(bounds)

    lines.append("Binaries")
    binaries = [v.name for v in instance.variables if v.is_binary]
    for start in range(0, len(binaries), TERMS_PER_LINE):
        lines.append(" " + " ".join(binaries[start:start + TERMS_PER_LINE]))
    lines.append("End")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    logger.info(f"Exported {objective.value} LP to {path}: {instance.summary()}")
    return path


@dataclass
class LpRow:
    terms: Dict[str, Fraction]
    relation: Relation
    rhs: Fraction


@dataclass
class LpModel:
    """Parsed contents of an LP file."""

    sense: Sense
    objective: Dict[str, Fraction] = field(default_factory=dict)
    rows: Dict[str, LpRow] = field(default_factory=dict)
    bounds: Dict[str, Tuple[Optional[Fraction], Optional[Fraction]]] = field(default_factory=dict)
    binaries: List[str] = field(default_factory=list)
    objective_scale: int = 1


_SECTIONS = {
    "maximize": "objective",
    "minimize": "objective",
    "subject to": "rows",
    "bounds": "bounds",
    "binaries": "binaries",
    "end": "end",
}
_TOKEN_RE = re.compile(r"<=|>=|=|[+-]|[A-Za-z_][A-Za-z0-9_#/.~]*|[0-9.]+(?:[eE][+-]?[0-9]+)?")
_SCALE_RE = re.compile(r"\\\s*Objective scale (\d+)\s*$")


def _signed_numbers(tokens: List[str]) -> List[object]:
    """Fold sign tokens into the numbers that follow them; names and relations pass through."""
    parts: List[object] = []
    sign = 1
    for token in tokens:
        if token in "+-":
            sign = -1 if token == "-" else 1
        elif token[0].isdigit() or token[0] == ".":
            parts.append(sign * Fraction(token))
            sign = 1
        else:
            parts.append(token)
    return parts


def _parse_terms(tokens: List[str]) -> Dict[str, Fraction]:
    terms: Dict[str, Fraction] = {}
    sign = Fraction(1)
    coef: Optional[Fraction] = None
    for token in tokens:
        if token in "+-":
            sign = Fraction(-1) if token == "-" else Fraction(1)
        elif token[0].isdigit() or token[0] == ".":
            coef = Fraction(token)
        else:
            value = sign * (coef if coef is not None else Fraction(1))
            if value != 0:
                terms[token] = terms.get(token, Fraction(0)) + value
            sign, coef = Fraction(1), None
    return terms


def read_lp(path: Union[str, Path]) -> LpModel:
    """Parse an LP file written by export_lp."""
    path = Path(path)
    section = None
    statements: Dict[str, List[str]] = {"objective": [], "rows": [], "bounds": [], "binaries": []}
    sense = Sense.MIN
    scale = 1
    for raw in path.read_text(encoding="ascii").splitlines():
        scale_match = _SCALE_RE.match(raw)
        if scale_match:
            scale = int(scale_match.group(1))
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if key == "maximize":
                sense = Sense.MAX
            continue
        if section is None or section == "end":
            raise SchemaError(f"{path}: text outside of a section: {line!r}")
        statements[section].append(line)

    model = LpModel(sense=sense)
    objective_text = " ".join(statements["objective"])
    objective = _parse_terms(_TOKEN_RE.findall(objective_text.split(":", 1)[-1]))
    model.objective = {name: coef / scale for name, coef in objective.items()}
    model.objective_scale = scale

    current: Optional[str] = None
    buffer: Dict[str, List[str]] = {}
    for line in statements["rows"]:
        if ":" in line:
            current, line = (part.strip() for part in line.split(":", 1))
            buffer[current] = []
        if current is None:
            raise SchemaError(f"{path}: unnamed constraint")
        buffer[current].extend(_TOKEN_RE.findall(line))
    for name, tokens in buffer.items():
        relation_at = next(i for i, t in enumerate(tokens) if t in ("<=", ">=", "="))
        rhs_tokens = tokens[relation_at + 1:]
        rhs = Fraction(rhs_tokens[-1]) * (-1 if rhs_tokens[0] == "-" else 1)
        model.rows[name] = LpRow(
            terms=_parse_terms(tokens[:relation_at]),
            relation=Relation(tokens[relation_at]),
            rhs=rhs,
        )

    for line in statements["bounds"]:
        parts = _signed_numbers(_TOKEN_RE.findall(line))
        if len(parts) == 5:
            model.bounds[parts[2]] = (parts[0], parts[4])
        elif len(parts) == 3:
            model.bounds[parts[0]] = (parts[2], None)
    for name in [n for n in model.rows if n[-3:] in BOUND_ROW_SUFFIXES]:
        row = model.rows.pop(name)
        [(var, coef)] = row.terms.items()
        lb, ub = model.bounds.get(var, (Fraction(0), None))
        if row.relation is Relation.GE:
            lb = row.rhs / coef
        else:
            ub = row.rhs / coef
        model.bounds[var] = (lb, ub)
    for line in statements["binaries"]:
        model.binaries.extend(line.split())
    return model


def read_solution_values(path: Union[str, Path]) -> Dict[str, float]:
    """Read ``<varname> <value>`` lines; '#' starts a comment line."""
    values: Dict[str, float] = {}
    path = Path(path)
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionImportError(f"{path}: line {number}: expected '<varname> <value>'")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError as e:
            raise SolutionImportError(f"{path}: line {number}: bad value {parts[1]!r}") from e
    return values


def import_solution(
    instance: PlacementInstance,
    path: Union[str, Path],
    tolerance: Optional[float] = None,
) -> PlacementSolution:
    """Rebuild a placement from an external solver's solution file.

    Binary values within tolerance of 0 or 1 are rounded; the result is
    checked against the original constraints and problems are logged.

    Raises:
        SolutionImportError: Unknown or missing variables, non-integral binaries
    """
    if tolerance is None:
        tolerance = get_config().binary_tolerance
    raw = read_solution_values(path)

    unknown = sorted(set(raw) - set(instance.var_index))
    if unknown:
        raise SolutionImportError(f"{path}: unknown variable {unknown[0]}")
    missing = [v.name for v in instance.variables if v.name not in raw]
    if missing:
        raise SolutionImportError(f"{path}: missing variable {missing[0]}")

    values: List[Fraction] = []
    for var in instance.variables:
        value = raw[var.name]
        if var.is_binary:
            rounded = round(value)
            if rounded not in (0, 1) or abs(value - rounded) > tolerance:
                raise SolutionImportError(f"{path}: binary {var.name} has non-integral value {value}")
            values.append(Fraction(rounded))
        else:
            values.append(Fraction(repr(value)))

    solution = extract_solution(instance, values, clean_cycles=False)
    ctx = instance.context
    report = check_solution(ctx.net, ctx.catalog, ctx.graph, solution)
    if report.clean:
        logger.info(f"Imported solution from {path} passes all checks")
    else:
        logger.warning(f"Imported solution from {path} violates {report.tags()}")
    return solution
