from fractions import Fraction

import pytest

from src.errors import RankingError
from src.milp import Objective, ObjectiveValues, PlacementSolution
from src.solver import SolveResult, SolveStatus, rank


def result(label, objective, value, used=1, latency=0):
    if value is None:
        return SolveResult(objective=objective, status=SolveStatus.INFEASIBLE, label=label)
    values = ObjectiveValues(remdr=Fraction(value), used_nodes=used, latency=Fraction(latency))
    solution = PlacementSolution(
        mapping={},
        roles={},
        instance_count={},
        path_edges={},
        used_nodes=frozenset(),
        remaining_rate={},
        path_latency={},
        objective_values=values,
    )
    return SolveResult(objective=objective, status=SolveStatus.OPTIMAL, value=value, solution=solution, label=label)


def test_maximized_objective_ranks_highest_first():
    ranked = rank(
        [
            result("a", Objective.REMDR, 10),
            result("b", Objective.REMDR, None),
            result("c", Objective.REMDR, 30),
            result("d", Objective.REMDR, 20),
        ]
    )
    assert [r.label for r in ranked] == ["c", "d", "a", "b"]


def test_ties_break_on_used_nodes_then_latency():
    ranked = rank(
        [
            result("a", Objective.LATENCY, 5, used=3, latency=5),
            result("b", Objective.LATENCY, 5, used=2, latency=5),
            result("c", Objective.LATENCY, 4, used=4, latency=4),
        ]
    )
    assert [r.label for r in ranked] == ["c", "b", "a"]


def test_mixed_objectives_are_rejected():
    with pytest.raises(RankingError):
        rank([result("a", Objective.REMDR, 1), result("b", Objective.LATENCY, 1)])
    with pytest.raises(RankingError):
        rank([result("a", Objective.REMDR, 1)], objective=Objective.USED_NODES)


def test_empty():
    assert rank([]) == []
