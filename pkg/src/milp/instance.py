"""Solver-independent integer program: variables, linear rows and objectives."""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from src.errors import BuildError

logger = logging.getLogger(__name__)


class VarKind(str, Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="

    def holds(self, lhs: Fraction, rhs: Fraction, tolerance: Fraction = Fraction(0)) -> bool:
        if self is Relation.LE:
            return lhs <= rhs + tolerance
        if self is Relation.GE:
            return lhs >= rhs - tolerance
        return abs(lhs - rhs) <= tolerance


class Sense(str, Enum):
    MIN = "min"
    MAX = "max"


class Objective(str, Enum):
    """The three placement metrics."""

    REMDR = "REMDR"
    USED_NODES = "USED_NODES"
    LATENCY = "LATENCY"

    @property
    def sense(self) -> Sense:
        return Sense.MAX if self is Objective.REMDR else Sense.MIN

    def better(self, a, b) -> bool:
        """True when value a is strictly better than b."""
        return a > b if self.sense is Sense.MAX else a < b


class ConstraintTag(str, Enum):
    """Constraint family a row was generated for."""

    UNIQUE_MAPPING = "a"
    ENDPOINT_MAPPING = "b"
    INSTANCE_COUPLING = "c"
    ROLE_EXCLUSIVE = "d"
    FORCED_ROLE = "e"
    NODE_CAPACITY = "f"
    INSTANCE_LIMIT = "g"
    REQUEST_LIMIT = "h"
    EDGE_ACTIVATION = "i"
    PATH_START = "j"
    PATH_END = "k"
    FLOW_PRESERVATION = "l"
    LOOP_RESTRICTION = "m"
    EDGE_CAPACITY = "n"
    LATENCY_BOUND = "o"
    USED_MARKING = "p"
    REMAINING_RATE = "q"
    PATH_LATENCY = "r"
    LINEARIZATION = "lin"
    EXTRA_BOUND = "bound"


FAMILY_TAGS = tuple(t for t in ConstraintTag if len(t.value) == 1)

_NAME_RE = re.compile(r"[^A-Za-z0-9_#/.]")


def lp_name(*parts: Any) -> str:
    """Join name parts with '_' and replace characters LP readers reject."""
    return _NAME_RE.sub("_", "_".join(str(p) for p in parts))


@dataclass(frozen=True)
class Var:
    """A decision or auxiliary variable; ``key`` holds its model indices."""

    index: int
    name: str
    kind: VarKind
    lb: Fraction
    ub: Optional[Fraction]
    family: str
    key: Tuple[Any, ...] = ()

    @property
    def is_binary(self) -> bool:
        return self.kind is VarKind.BINARY


@dataclass(frozen=True)
class LinearConstraint:
    """sum(coef * var) <relation> rhs."""

    name: str
    terms: Tuple[Tuple[Fraction, int], ...]
    relation: Relation
    rhs: Fraction
    tag: ConstraintTag
    indices: Tuple[Any, ...] = ()

    def activity(self, values: Sequence[Fraction]) -> Fraction:
        return sum((coef * values[var] for coef, var in self.terms), Fraction(0))

    def satisfied(self, values: Sequence[Fraction]) -> bool:
        return self.relation.holds(self.activity(values), self.rhs)


@dataclass
class PlacementInstance:
    """Linearized placement model.

    Built once by build_instance and treated as immutable afterwards.
    """

    variables: List[Var] = field(default_factory=list)
    constraints: List[LinearConstraint] = field(default_factory=list)
    objectives: Dict[Objective, Dict[int, Fraction]] = field(default_factory=dict)
    var_index: Dict[str, int] = field(default_factory=dict)
    products: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    definitions: Dict[int, int] = field(default_factory=dict)
    families: Dict[str, Dict[Tuple[Any, ...], int]] = field(default_factory=dict)
    context: Any = None
    _product_cache: Dict[Tuple[int, int], int] = field(default_factory=dict, repr=False)
    _row_counts: Dict[str, int] = field(default_factory=dict, repr=False)

    # Variables

    def add_var(
        self,
        family: str,
        key: Tuple[Any, ...],
        kind: VarKind = VarKind.BINARY,
        lb: Fraction = Fraction(0),
        ub: Optional[Fraction] = Fraction(1),
        name: Optional[str] = None,
    ) -> int:
        base = name or lp_name(family, *key)
        unique = base
        suffix = 1
        while unique in self.var_index:
            suffix += 1
            unique = f"{base}~{suffix}"
        index = len(self.variables)
        self.variables.append(
            Var(index=index, name=unique, kind=kind, lb=Fraction(lb), ub=None if ub is None else Fraction(ub),
                family=family, key=tuple(key))
        )
        self.var_index[unique] = index
        self.families.setdefault(family, {})[tuple(key)] = index
        return index

    def var(self, family: str, *key: Any) -> Optional[int]:
        return self.families.get(family, {}).get(tuple(key))

    def family(self, family: str) -> Dict[Tuple[Any, ...], int]:
        return self.families.get(family, {})

    # Rows

    def add_constraint(
        self,
        terms: Sequence[Tuple[Any, int]],
        relation: Relation,
        rhs: Any,
        tag: ConstraintTag,
        indices: Tuple[Any, ...] = (),
    ) -> int:
        merged: Dict[int, Fraction] = {}
        for coef, var in terms:
            merged[var] = merged.get(var, Fraction(0)) + Fraction(coef)
        count = self._row_counts.get(tag.value, 0) + 1
        self._row_counts[tag.value] = count
        self.constraints.append(
            LinearConstraint(
                name=f"{tag.value}_{count}",
                terms=tuple((c, v) for v, c in merged.items() if c != 0),
                relation=relation,
                rhs=Fraction(rhs),
                tag=tag,
                indices=tuple(indices),
            )
        )
        return len(self.constraints) - 1

    def linearize(
        self,
        x: int,
        y: int,
        family: str = "z",
        key: Optional[Tuple[Any, ...]] = None,
    ) -> int:
        """Return an auxiliary z = x * y for binaries x and y.

        Adds z <= x, z <= y and z >= x + y - 1 once per unordered pair.
        """
        for operand in (x, y):
            if not self.variables[operand].is_binary:
                raise BuildError(
                    f"cannot linearize product with non-binary {self.variables[operand].name}"
                )
        if x == y:
            return x
        pair = (min(x, y), max(x, y))
        cached = self._product_cache.get(pair)
        if cached is not None:
            return cached

        vx, vy = self.variables[x], self.variables[y]
        z = self.add_var(family, key if key is not None else (vx.name, vy.name))
        self.add_constraint([(1, z), (-1, x)], Relation.LE, 0, ConstraintTag.LINEARIZATION, (vx.name, vy.name))
        self.add_constraint([(1, z), (-1, y)], Relation.LE, 0, ConstraintTag.LINEARIZATION, (vx.name, vy.name))
        self.add_constraint([(1, x), (1, y), (-1, z)], Relation.LE, 1, ConstraintTag.LINEARIZATION, (vx.name, vy.name))
        self._product_cache[pair] = z
        self.products[z] = (x, y)
        return z

    # Evaluation

    def objective_value(self, objective: Objective, values: Sequence[Fraction]) -> Fraction:
        return sum(
            (coef * values[var] for var, coef in self.objectives[objective].items()), Fraction(0)
        )

    def complete(self, assignment: Mapping[int, Fraction]) -> List[Fraction]:
        """Fill auxiliaries and defined continuous variables from the original binaries."""
        values = [Fraction(assignment.get(v.index, 0)) for v in self.variables]
        for z in sorted(self.products):
            x, y = self.products[z]
            values[z] = values[x] * values[y]
        for var, row_index in self.definitions.items():
            row = self.constraints[row_index]
            coef = next(c for c, v in row.terms if v == var)
            rest = sum((c * values[v] for c, v in row.terms if v != var), Fraction(0))
            values[var] = (row.rhs - rest) / coef
        return values

    def violated(self, values: Sequence[Fraction]) -> List[LinearConstraint]:
        """Rows and variable bounds not satisfied by a full assignment."""
        bad = [row for row in self.constraints if not row.satisfied(values)]
        for var in self.variables:
            value = values[var.index]
            out_of_bounds = value < var.lb or (var.ub is not None and value > var.ub)
            if var.is_binary and value not in (0, 1):
                out_of_bounds = True
            if out_of_bounds:
                bad.append(
                    LinearConstraint(
                        name=f"bound_{var.name}",
                        terms=((Fraction(1), var.index),),
                        relation=Relation.LE,
                        rhs=var.ub if var.ub is not None else value,
                        tag=ConstraintTag.EXTRA_BOUND,
                        indices=(var.name,),
                    )
                )
        return bad

    def is_feasible(self, values: Sequence[Fraction]) -> bool:
        return not self.violated(values)

    def summary(self) -> str:
        binaries = sum(1 for v in self.variables if v.is_binary)
        return (
            f"{len(self.variables)} variables ({binaries} binary), "
            f"{len(self.constraints)} constraints"
        )

    def counts_by_family(self) -> Dict[str, int]:
        return {family: len(keys) for family, keys in self.families.items()}

    def rows_by_tag(self) -> Dict[str, int]:
        return dict(self._row_counts)
