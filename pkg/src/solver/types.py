"""Solver options and results."""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.config import get_config
from src.milp.instance import Objective, Relation
from src.milp.solution import ObjectiveValues, PlacementSolution
from src.model.numbers import Rational


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"


class Backend(str, Enum):
    MONOLITHIC = "monolithic"
    DECOMPOSED = "decomposed"


class ExtraBound(BaseModel):
    """metric <relation> value, added on top of the placement constraints."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    metric: Objective
    relation: Relation
    value: Rational

    def holds(self, values: ObjectiveValues) -> bool:
        return self.relation.holds(Fraction(values.value(self.metric)), self.value)


class SolveConfig(BaseModel):
    """Per-call solver options; unset fields fall back to the global configuration."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    objective: Objective = Objective.USED_NODES
    time_limit: float = Field(default_factory=lambda: get_config().time_limit, gt=0)
    threads: int = Field(default_factory=lambda: get_config().threads, ge=1)
    extra_bounds: List[ExtraBound] = Field(default_factory=list)
    seed: int = Field(default_factory=lambda: get_config().seed)
    backend: Backend = Backend.DECOMPOSED
    progress_interval: int = Field(default_factory=lambda: get_config().progress_interval, ge=1)

    @field_validator("extra_bounds", mode="before")
    @classmethod
    def accept_tuples(cls, v):
        """Bounds may be given as ``(metric, relation, value)`` tuples."""
        if isinstance(v, (list, tuple)):
            return [
                {"metric": b[0], "relation": b[1], "value": b[2]} if isinstance(b, (list, tuple)) else b
                for b in v
            ]
        return v

    def with_bounds(self, *bounds: ExtraBound, objective: Optional[Objective] = None) -> "SolveConfig":
        return self.model_copy(
            update={
                "extra_bounds": list(self.extra_bounds) + list(bounds),
                "objective": objective or self.objective,
            }
        )


@dataclass
class SolveStats:
    nodes_explored: int = 0
    wall_time: float = 0.0


@dataclass
class SolveResult:
    objective: Objective
    status: SolveStatus
    value: Optional[Union[int, Fraction]] = None
    solution: Optional[PlacementSolution] = None
    bound: Optional[Union[int, Fraction]] = None
    stats: SolveStats = field(default_factory=SolveStats)
    label: str = ""

    @property
    def has_solution(self) -> bool:
        return self.solution is not None

    def describe(self) -> str:
        value = "-" if self.value is None else str(self.value)
        return (
            f"{self.label or 'run'}: {self.status.value} {self.objective.value}={value} "
            f"explored={self.stats.nodes_explored} time={self.stats.wall_time:.2f}s"
        )
