"""Ordering of placement results for comparison."""
from fractions import Fraction
from typing import List, Sequence

from src.errors import RankingError
from src.milp.instance import Objective, Sense
from src.solver.types import SolveResult


def rank(results: Sequence[SolveResult], objective: Objective = None) -> List[SolveResult]:
    """Sort results best-first; results without a solution go last.

    Ties on the objective are broken by used nodes, then latency, then label.

    Raises:
        RankingError: When the results were optimized for different objectives
    """
    results = list(results)
    if not results:
        return []
    objectives = {r.objective for r in results}
    if objective is not None:
        objectives.add(Objective(objective))
    if len(objectives) > 1:
        raise RankingError(
            f"cannot rank results of different objectives: {sorted(o.value for o in objectives)}"
        )
    objective = objectives.pop()

    def key(result: SolveResult):
        if result.solution is None:
            return (1, Fraction(0), 0, Fraction(0), result.label)
        value = Fraction(result.value)
        if objective.sense is Sense.MAX:
            value = -value
        values = result.solution.objective_values
        return (0, value, values.used_nodes, values.latency, result.label)

    return sorted(results, key=key)
