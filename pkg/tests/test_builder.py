import itertools
from fractions import Fraction

import pytest

from conftest import heuristic_graph, make_catalog, make_network, make_requests, request_entry
from oracle import enumerate_placements, model_values
from src.errors import BuildError
from src.milp import (
    ConstraintTag,
    Objective,
    PlacementInstance,
    Relation,
    build_instance,
    candidate_edges,
    check_solution,
    extract_solution,
)
from src.milp.instance import VarKind


def test_tiny_pruned_counts(tiny):
    net, catalog, graph = tiny
    inst = build_instance(net, catalog, graph, prune=True)
    counts = inst.counts_by_family()
    assert counts["e"] == 4
    assert counts["m"] == 4
    assert counts["mm"] == 4
    assert counts["remdr"] == len(net.edges)
    assert counts["lat"] == len(graph.edges)
    assert inst.var("m", "r1/a1", "B") is None


def test_tiny_unpruned_counts(tiny):
    net, catalog, graph = tiny
    inst = build_instance(net, catalog, graph, prune=False)
    assert inst.counts_by_family()["e"] == 4 * 4 * 2
    assert inst.var("m", "r1/a1", "B") is not None


@pytest.mark.slow
def test_abilene_unpruned_path_variables(abilene):
    net, catalog, requests = abilene
    graph = heuristic_graph(requests)
    inst = build_instance(net, catalog, graph, prune=False)
    assert inst.counts_by_family()["e"] == 42 * 144 * len(graph.edges)


def test_candidate_edges(square_net):
    assert candidate_edges(square_net, "A", "A", True) == [("A", "A")]
    edges = candidate_edges(square_net, "A", "B", True)
    assert all(v != w for v, w in edges)
    assert not any(w == "A" or v == "B" for v, w in edges)
    assert ("A", "B") in edges and ("C", "D") in edges
    assert candidate_edges(square_net, "A", "B", False) == list(square_net.edges)


def test_every_family_is_generated(tiny):
    net, catalog, graph = tiny
    inst = build_instance(net, catalog, graph, prune=False)
    rows = inst.rows_by_tag()
    for tag in "abcdfghijklmnopqr":
        assert rows.get(tag, 0) > 0, tag


@pytest.fixture
def forced():
    net = make_network({"A": (10, 2), "B": (10, 2)}, [("A", "B", 10, 1)])
    catalog = make_catalog({"vo": (5, 0, 2, 2), "nat": (0, 1, 2, 2)})
    entry = request_entry("r", "a1 . v1 . n1 . a2", {"v1": "vo", "n1": "nat"}, {"a1": "A", "a2": "B"}, [("a1", "a2")])
    return net, catalog, heuristic_graph(make_requests([entry], catalog, net))


def test_forced_roles_for_datacenter_and_switch_only_functions(forced):
    net, catalog, graph = forced
    inst = build_instance(net, catalog, graph)
    forced_rows = [row for row in inst.constraints if row.tag is ConstraintTag.FORCED_ROLE]
    assert len(forced_rows) == 2 * 2 * 2

    def fixed(use, v):
        found = {}
        for row in forced_rows:
            if row.indices == (use, v):
                [(_, var)] = row.terms
                found[inst.variables[var].family] = row.rhs
        return found

    assert fixed("r/v1", "A") == {"ms": 0, "md": 1}
    assert fixed("r/n1", "B") == {"ms": 1, "md": 0}


def test_hosts_without_capacity_are_pruned():
    net = make_network({"A": (4, 0), "B": (0, 0)}, [("A", "B", 10, 1)])
    catalog = make_catalog({"fw": (1, 1, 2, 2)})
    entry = request_entry("r", "a1 . fw1 . a2", {"fw1": "fw"}, {"a1": "A", "a2": "B"}, [("a1", "a2")])
    graph = heuristic_graph(make_requests([entry], catalog, net))
    inst = build_instance(net, catalog, graph, prune=True)
    assert inst.var("m", "r/fw1", "A") is not None
    assert inst.var("m", "r/fw1", "B") is None


def test_unknown_function_in_graph(tiny):
    net, _, graph = tiny
    with pytest.raises(BuildError, match="unknown function"):
        build_instance(net, make_catalog({"dpi": (1, 0, 1, 1)}), graph)


def test_objectives(tiny):
    net, catalog, graph = tiny
    inst = build_instance(net, catalog, graph)
    remdr_edges = {inst.variables[v].key for v in inst.objectives[Objective.REMDR]}
    assert remdr_edges == {("A", "B"), ("B", "A")}
    assert len(inst.objectives[Objective.USED_NODES]) == 2
    assert set(inst.objectives[Objective.LATENCY].values()) == {1}


@pytest.mark.parametrize("fixture", ["tiny", "constrained"])
def test_enumerated_placements_are_model_feasible(fixture, request):
    net, catalog, graph = request.getfixturevalue(fixture)
    inst = build_instance(net, catalog, graph)
    placements = list(enumerate_placements(net, catalog, graph))
    assert placements
    for placement in placements:
        values = model_values(inst, net, catalog, graph, placement)
        assert inst.violated(values) == []
        assert inst.objective_value(Objective.REMDR, values) == placement.remdr
        assert inst.objective_value(Objective.USED_NODES, values) == placement.used_nodes
        assert inst.objective_value(Objective.LATENCY, values) == placement.latency


def test_model_feasible_assignments_pass_the_checker(tiny):
    net, catalog, graph = tiny
    inst = build_instance(net, catalog, graph)
    originals = [v.index for v in inst.variables if v.is_binary and v.family not in ("mm", "z")]
    assert len(originals) <= 20
    feasible = 0
    for bits in itertools.product((0, 1), repeat=len(originals)):
        values = inst.complete(dict(zip(originals, bits)))
        if inst.violated(values):
            continue
        feasible += 1
        report = check_solution(net, catalog, graph, extract_solution(inst, values, clean_cycles=False))
        assert report.clean, (bits, report.tags())
    assert feasible > 0


# Product linearization


def test_linearized_product_matches_quadratic_form():
    inst = PlacementInstance()
    x = inst.add_var("x", (0,))
    y = inst.add_var("y", (0,))
    inst.linearize(x, y)
    rows = [r for r in inst.constraints if r.tag is ConstraintTag.LINEARIZATION]
    assert len(rows) == 3
    for a, b, c in itertools.product((0, 1), repeat=3):
        values = [Fraction(a), Fraction(b), Fraction(c)]
        assert all(r.satisfied(values) for r in rows) == (c == a * b)


def test_linearize_reuses_products():
    inst = PlacementInstance()
    x = inst.add_var("x", (0,))
    y = inst.add_var("y", (0,))
    z = inst.linearize(x, y, family="mm", key=("p",))
    assert inst.linearize(y, x) == z
    assert inst.linearize(x, x) == x
    assert inst.var("mm", "p") == z
    assert inst.products[z] == (x, y)


def test_linearize_rejects_continuous_operands():
    inst = PlacementInstance()
    x = inst.add_var("x", (0,))
    c = inst.add_var("c", (0,), kind=VarKind.CONTINUOUS, ub=None)
    with pytest.raises(BuildError):
        inst.linearize(x, c)


def test_complete_fills_products_and_definitions():
    inst = PlacementInstance()
    x = inst.add_var("x", (0,))
    y = inst.add_var("y", (0,))
    z = inst.linearize(x, y)
    slack = inst.add_var("s", (0,), kind=VarKind.CONTINUOUS, ub=None)
    row = inst.add_constraint([(1, slack), (3, z)], Relation.EQ, 5, ConstraintTag.REMAINING_RATE)
    inst.definitions[slack] = row
    values = inst.complete({x: 1, y: 1})
    assert values[z] == 1
    assert values[slack] == 2
    assert inst.is_feasible(values)
