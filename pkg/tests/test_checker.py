import dataclasses
from fractions import Fraction

import pytest

from conftest import make_catalog, make_network, make_requests, request_entry
from src.chain import parse_chain
from src.graph import expand_heuristic
from src.milp import RoleAssignment, RoutedPath, assemble_solution, check_solution
from src.model.catalog import Role

DC = RoleAssignment.of(Role.DATACENTER)
SWITCH = RoleAssignment.of(Role.SWITCH)
LINKS = [("A", "B"), ("A", "C"), ("A", "D"), ("B", "C"), ("B", "D"), ("C", "D")]


def square(c_d_a=4, ab_rate=10):
    nodes = {"A": (c_d_a, 1), "B": (4, 1), "C": (4, 1), "D": (0, 1)}
    return make_network(nodes, [(a, b, ab_rate if (a, b) == ("A", "B") else 10, 1) for a, b in LINKS])


def catalog(fw_inst=2, fw_req=2):
    return make_catalog({"fw": (1, 1, fw_inst, fw_req), "dpi": (2, 0, 1, 1)})


@pytest.fixture
def setting():
    net, cat = square(), catalog()
    entry = request_entry(
        "r",
        "a1 . fw1 . dpi1 . fw2 . a2",
        {"fw1": "fw", "dpi1": "dpi", "fw2": "fw"},
        {"a1": "A", "a2": "C"},
        [("a1", "a2")],
        l_req={("a1", "a2"): 10},
    )
    [request] = make_requests([entry], cat, net)
    return net, cat, expand_heuristic(parse_chain(request.chain, request), request)


BASE_MAPPING = {"a1": "A", "fw1": "A", "dpi1": "B", "fw2": "A", "a2": "C"}
BASE_PATHS = {
    ("a1", "fw1"): [("A", "A")],
    ("fw1", "dpi1"): [("A", "B")],
    ("dpi1", "fw2"): [("B", "A")],
    ("fw2", "a2"): [("A", "C")],
}


def build(net, cat, graph, mapping=None, paths=None, roles=None):
    mapping = dict(BASE_MAPPING, **(mapping or {}))
    routes = {**BASE_PATHS, **(paths or {})}
    routed = {
        key: RoutedPath(source=mapping[key[0]], target=mapping[key[1]], edges=tuple(edges))
        for key, edges in routes.items()
    }
    all_roles = dict({"fw1": DC, "dpi1": DC, "fw2": DC}, **(roles or {}))
    return assemble_solution(net, cat, graph, mapping, all_roles, routed)


def tags(net, cat, graph, solution):
    return check_solution(net, cat, graph, solution).tags()


def test_base_solution_is_clean(setting):
    net, cat, graph = setting
    report = check_solution(net, cat, graph, build(net, cat, graph))
    assert report.clean
    assert report.objective_values.latency == 3
    assert report.objective_values.used_nodes == 2


def test_unique_mapping(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    mapping = {k: v for k, v in base.mapping.items() if k != "a1"}
    assert tags(net, cat, graph, dataclasses.replace(base, mapping=mapping)) == ["a"]


def test_endpoint_mapping(setting):
    net, cat, graph = setting
    solution = build(net, cat, graph, mapping={"a2": "B"}, paths={("fw2", "a2"): [("A", "B")]})
    assert tags(net, cat, graph, solution) == ["b"]


def test_instance_coupling(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    solution = dataclasses.replace(
        base,
        instance_count={**base.instance_count, ("fw", "C"): 1},
        used_nodes=base.used_nodes | {"C"},
    )
    assert tags(net, cat, graph, solution) == ["c"]


def test_role_exclusive(setting):
    net, cat, graph = setting
    solution = build(net, cat, graph, roles={"fw1": RoleAssignment(switch=1, datacenter=1)})
    assert tags(net, cat, graph, solution) == ["d"]


def test_forced_role(setting):
    net, cat, graph = setting
    assert tags(net, cat, graph, build(net, cat, graph, roles={"dpi1": SWITCH})) == ["e"]


def test_node_capacity(setting):
    _, cat, graph = setting
    small = square(c_d_a=1)
    assert tags(small, cat, graph, build(small, cat, graph)) == ["f"]


def test_instance_limit(setting):
    net, _, graph = setting
    single = catalog(fw_inst=1)
    solution = build(
        net,
        single,
        graph,
        mapping={"fw2": "C"},
        paths={("dpi1", "fw2"): [("B", "C")], ("fw2", "a2"): [("C", "C")]},
    )
    assert tags(net, single, graph, solution) == ["g"]


def test_request_limit(setting):
    net, _, graph = setting
    exclusive = catalog(fw_req=1)
    assert tags(net, exclusive, graph, build(net, exclusive, graph)) == ["h"]


def test_edge_activation(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    paths = dict(base.path_edges)
    paths[("fw1", "dpi1")] = dataclasses.replace(paths[("fw1", "dpi1")], source="C")
    assert tags(net, cat, graph, dataclasses.replace(base, path_edges=paths)) == ["i"]


@pytest.mark.parametrize(
    "edges,expected",
    [
        ([("A", "B"), ("A", "C"), ("C", "D"), ("D", "A")], "j"),
        ([("A", "B"), ("B", "C"), ("C", "D"), ("D", "B")], "k"),
        ([("A", "B"), ("C", "D")], "l"),
        ([("A", "B"), ("C", "C")], "m"),
    ],
)
def test_path_shape(setting, edges, expected):
    net, cat, graph = setting
    solution = build(net, cat, graph, paths={("fw1", "dpi1"): edges})
    assert tags(net, cat, graph, solution) == [expected]


def test_edge_capacity(setting):
    _, cat, graph = setting
    narrow = square(ab_rate="1/2")
    solution = build(narrow, cat, graph)
    assert solution.remaining_rate[("A", "B")] == Fraction(-1, 2)
    assert tags(narrow, cat, graph, solution) == ["n"]


def test_latency_bound(setting):
    net, cat, graph = setting
    tight = dataclasses.replace(graph, latency_bounds={("a1", "a2"): Fraction(2)})
    assert tags(net, cat, tight, build(net, cat, graph)) == ["o"]


def test_used_marking(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    assert tags(net, cat, graph, dataclasses.replace(base, used_nodes=frozenset({"A"}))) == ["p"]


def test_remaining_rate(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    remaining = dict(base.remaining_rate)
    remaining[("A", "B")] += 1
    assert tags(net, cat, graph, dataclasses.replace(base, remaining_rate=remaining)) == ["q"]


def test_path_latency(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    latency = dict(base.path_latency)
    latency[("fw1", "dpi1")] = Fraction(7)
    assert tags(net, cat, graph, dataclasses.replace(base, path_latency=latency)) == ["r"]


def test_recorded_objectives_must_match(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    wrong = dataclasses.replace(base.objective_values, remdr=base.objective_values.remdr + 1)
    report = check_solution(net, cat, graph, dataclasses.replace(base, objective_values=wrong))
    assert report.tags() == ["objective"]
    assert report.to_json()[0]["indices"] == ["remdr"]


def test_objective_tolerance(setting):
    net, cat, graph = setting
    base = build(net, cat, graph)
    wrong = dataclasses.replace(base.objective_values, latency=base.objective_values.latency + Fraction(1, 10**9))
    solution = dataclasses.replace(base, objective_values=wrong)
    assert not check_solution(net, cat, graph, solution).clean
    assert check_solution(net, cat, graph, solution, tolerance=1e-6).clean


def test_detached_self_loop_rides_along(setting):
    net, cat, graph = setting
    solution = build(net, cat, graph, paths={("a1", "fw1"): [("A", "A"), ("C", "C")]})
    assert tags(net, cat, graph, solution) == ["l"]


def test_detached_cycle_is_not_part_of_the_route():
    net = make_network(
        {v: (4, 1) for v in "ABCDE"},
        [("A", "B", 10, 1), ("B", "C", 10, 1), ("C", "D", 10, 1), ("D", "E", 10, 1), ("E", "C", 10, 1)],
    )
    cat = make_catalog({"fw": (1, 1, 2, 2)})
    entry = request_entry("r", "a1 . fw1 . a2", {"fw1": "fw"}, {"a1": "A", "a2": "B"}, [("a1", "a2")])
    [request] = make_requests([entry], cat, net)
    graph = expand_heuristic(parse_chain(request.chain, request), request)
    mapping = {"a1": "A", "fw1": "A", "a2": "B"}
    routes = {
        ("a1", "fw1"): (("A", "A"),),
        ("fw1", "a2"): (("A", "B"), ("C", "D"), ("D", "E"), ("E", "C")),
    }
    paths = {key: RoutedPath(source=mapping[key[0]], target=mapping[key[1]], edges=edges) for key, edges in routes.items()}
    solution = assemble_solution(net, cat, graph, mapping, {"fw1": DC}, paths)
    report = check_solution(net, cat, graph, solution)
    assert report.tags() == ["l"]
    assert report.violations[0].indices == ("fw1", "a2", "A", "B", "C", "D")

    routes[("fw1", "a2")] = (("A", "B"),)
    paths[("fw1", "a2")] = RoutedPath(source="A", target="B", edges=routes[("fw1", "a2")])
    assert check_solution(net, cat, graph, assemble_solution(net, cat, graph, mapping, {"fw1": DC}, paths)).clean
