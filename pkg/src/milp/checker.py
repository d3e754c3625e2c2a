"""Independent feasibility check of placement solutions.

Constraints are re-evaluated in their original product form directly on the
solution fields, without going through the linearized instance.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, List, Optional, Tuple

import networkx as nx

from src.graph.vnf_graph import VnfGraph
from src.milp.instance import ConstraintTag
from src.milp.solution import ObjectiveValues, PlacementSolution, compute_objectives, edge_loads
from src.model.catalog import FunctionCatalog
from src.model.network import SubstrateNetwork
from src.model.numbers import format_rational

logger = logging.getLogger(__name__)

Tag = ConstraintTag
OBJECTIVE_TAG = "objective"


@dataclass(frozen=True)
class Violation:
    tag: str
    indices: Tuple[Any, ...]
    lhs: Any
    relation: str
    rhs: Any

    def to_dict(self) -> dict:
        def plain(value):
            if isinstance(value, Fraction):
                return format_rational(value)
            if isinstance(value, tuple):
                return [plain(v) for v in value]
            return value

        return {
            "tag": self.tag,
            "indices": plain(self.indices),
            "lhs": plain(self.lhs),
            "relation": self.relation,
            "rhs": plain(self.rhs),
        }


@dataclass
class CheckReport:
    violations: List[Violation] = field(default_factory=list)
    objective_values: Optional[ObjectiveValues] = None

    @property
    def clean(self) -> bool:
        return not self.violations

    def tags(self) -> List[str]:
        return sorted({v.tag for v in self.violations})

    def add(self, tag, indices, lhs, relation, rhs) -> None:
        tag = tag.value if isinstance(tag, ConstraintTag) else tag
        self.violations.append(Violation(tag, tuple(indices), lhs, relation, rhs))

    def to_json(self) -> List[dict]:
        return [v.to_dict() for v in self.violations]


def _check_mapping(report, net, catalog, graph, sol) -> None:
    for node_id, node in graph.nodes.items():
        v = sol.mapping.get(node_id)
        if v is None or v not in net.capacities:
            report.add(Tag.UNIQUE_MAPPING, (node_id,), 0, "=", 1)
        elif not node.is_use and v != node.location:
            report.add(Tag.ENDPOINT_MAPPING, (node_id, node.location), 0, "=", 1)

    users = Counter(
        (graph.function(u), sol.mapping[u]) for u in graph.uses if u in sol.mapping
    )
    for key in sorted(set(users) | set(sol.instance_count)):
        count = sol.instance_count.get(key, 0)
        if users[key] > 0 and count < 1:
            report.add(Tag.INSTANCE_COUPLING, key, users[key], "<=", 0)
        elif users[key] == 0 and count > 0:
            report.add(Tag.INSTANCE_COUPLING, key, count, "<=", 0)
        elif count > 1:
            report.add(Tag.INSTANCE_COUPLING, key, count, "<=", 1)

    for f in catalog.ids:
        total = sum(c for (g, _), c in sol.instance_count.items() if g == f)
        if total > catalog[f].max_instances:
            report.add(Tag.INSTANCE_LIMIT, (f,), total, "<=", catalog[f].max_instances)
    for (f, v), n in sorted(users.items()):
        if f in catalog and n > catalog[f].max_requests:
            report.add(Tag.REQUEST_LIMIT, (v, f), n, "<=", catalog[f].max_requests)

    with_instance = {v for (_, v), c in sol.instance_count.items() if c > 0}
    for v in sorted(with_instance ^ set(sol.used_nodes)):
        report.add(Tag.USED_MARKING, (v,), int(v in sol.used_nodes), "=", int(v in with_instance))


def _check_roles(report, net, catalog, graph, sol) -> None:
    dc_load = {v: Fraction(0) for v in net.nodes}
    switch_load = {v: Fraction(0) for v in net.nodes}
    for u in graph.uses:
        v = sol.mapping.get(u)
        if v is None or v not in net.capacities:
            continue
        spec = catalog[graph.function(u)]
        role = sol.roles.get(u)
        if role is None or role.switch + role.datacenter != 1:
            lhs = (role.switch + role.datacenter) if role else 0
            report.add(Tag.ROLE_EXCLUSIVE, (u, v), lhs, "=", 1)
            if role is None:
                continue
        if spec.datacenter_only and (role.switch != 0 or role.datacenter != 1):
            report.add(Tag.FORCED_ROLE, (u, v), role.datacenter, "=", 1)
        if spec.switch_only and (role.datacenter != 0 or role.switch != 1):
            report.add(Tag.FORCED_ROLE, (u, v), role.switch, "=", 1)
        dc_load[v] += spec.dc_demand * role.datacenter
        switch_load[v] += spec.switch_demand * role.switch
    for v in net.nodes:
        if dc_load[v] > net.dc_capacity(v):
            report.add(Tag.NODE_CAPACITY, (v, "datacenter"), dc_load[v], "<=", net.dc_capacity(v))
        if switch_load[v] > net.switch_capacity(v):
            report.add(Tag.NODE_CAPACITY, (v, "switch"), switch_load[v], "<=", net.switch_capacity(v))


def _detached_edges(edges, start: str) -> List[Tuple[str, str]]:
    """Path edges not weakly connected to the start node."""
    if not edges:
        return []
    walk = nx.DiGraph(list(edges))
    if start not in walk:
        return sorted(edges)
    attached = nx.node_connected_component(walk.to_undirected(as_view=True), start)
    return sorted(e for e in edges if e[0] not in attached)


def _check_paths(report, net, graph, sol) -> None:
    for key in graph.edge_keys:
        u, u2 = key
        x, y = sol.mapping.get(u), sol.mapping.get(u2)
        if x is None or y is None:
            continue
        path = sol.path_edges.get(key)
        before = len(report.violations)
        if path is None:
            report.add(Tag.PATH_START, (u, u2, x, y), 0, "=", 1)
            report.add(Tag.PATH_END, (u, u2, x, y), 0, "=", 1)
            continue

        if path.source != x or path.target != y:
            report.add(Tag.EDGE_ACTIVATION, (u, u2, path.source, path.target), 1, "<=", 0)
        for edge in path.edges:
            if not net.has_edge(*edge):
                report.add(Tag.EDGE_ACTIVATION, (u, u2) + tuple(edge), 1, "<=", 0)

        out_deg = Counter(v for v, _ in path.edges)
        in_deg = Counter(w for _, w in path.edges)
        if x != y:
            if out_deg[x] != 1 or in_deg[x] != 0:
                report.add(Tag.PATH_START, (u, u2, x, y), (out_deg[x], in_deg[x]), "=", (1, 0))
            if in_deg[y] != 1 or out_deg[y] != 0:
                report.add(Tag.PATH_END, (u, u2, x, y), (in_deg[y], out_deg[y]), "=", (1, 0))
        else:
            if out_deg[x] != 1:
                report.add(Tag.PATH_START, (u, u2, x, y), out_deg[x], "=", 1)
            if in_deg[x] != 1:
                report.add(Tag.PATH_END, (u, u2, x, y), in_deg[x], "=", 1)

        for w in sorted((set(out_deg) | set(in_deg)) - {x, y}):
            if in_deg[w] != out_deg[w]:
                report.add(Tag.FLOW_PRESERVATION, (u, u2, x, y, w), in_deg[w], "=", out_deg[w])

        edges = set(path.edges)
        for v, w in sorted(edges):
            if x != y and v == w:
                report.add(Tag.LOOP_RESTRICTION, (u, u2, x, y, v, w), 1, "=", 0)
            elif x == y and v != w:
                report.add(Tag.LOOP_RESTRICTION, (u, u2, x, y, v, w), 1, "=", 0)
            elif v < w and (w, v) in edges:
                report.add(Tag.LOOP_RESTRICTION, (u, u2, x, y, v, w), 2, "<=", 1)

        if len(report.violations) == before:
            stray = _detached_edges(path.edges, x)
            if stray:
                report.add(Tag.FLOW_PRESERVATION, (u, u2, x, y) + stray[0], len(stray), "=", 0)


def _check_metrics(report, net, graph, sol) -> None:
    loads = edge_loads(net, graph, sol.path_edges)
    for edge in net.edges:
        if loads[edge] > net.rate(edge):
            report.add(Tag.EDGE_CAPACITY, edge, loads[edge], "<=", net.rate(edge))
        expected = net.rate(edge) - loads[edge]
        if sol.remaining_rate.get(edge) != expected:
            report.add(Tag.REMAINING_RATE, edge, sol.remaining_rate.get(edge), "=", expected)

    latency = {
        key: sum((net.latency(e) for e in path.edges if net.has_edge(*e)), Fraction(0))
        for key, path in sol.path_edges.items()
    }
    for key in graph.edge_keys:
        if key in latency and sol.path_latency.get(key) != latency[key]:
            report.add(Tag.PATH_LATENCY, key, sol.path_latency.get(key), "=", latency[key])

    for pair, bound in graph.latency_bounds.items():
        total = sum((latency.get(k, Fraction(0)) for k in graph.bounded_edges(pair)), Fraction(0))
        if total > bound:
            report.add(Tag.LATENCY_BOUND, pair, total, "<=", bound)


def _close(a, b, tolerance: Optional[float]) -> bool:
    if tolerance is None:
        return a == b
    return abs(Fraction(a) - Fraction(b)) <= Fraction(tolerance)


def check_solution(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    sol: PlacementSolution,
    tolerance: Optional[float] = None,
) -> CheckReport:
    """Evaluate every constraint family on a solution.

    Args:
        net: Substrate network
        catalog: Function catalog
        graph: The VNF graph the solution places
        sol: Candidate solution
        tolerance: Allowed objective deviation; exact comparison when None

    Returns:
        CheckReport, empty exactly when the solution is feasible and its
        recorded objective values match the recomputed ones
    """
    report = CheckReport()
    _check_mapping(report, net, catalog, graph, sol)
    _check_roles(report, net, catalog, graph, sol)
    _check_paths(report, net, graph, sol)
    _check_metrics(report, net, graph, sol)

    recomputed = compute_objectives(net, graph, sol.mapping, sol.path_edges)
    report.objective_values = recomputed
    recorded = sol.objective_values
    for name in ("remdr", "used_nodes", "latency"):
        if not _close(getattr(recorded, name), getattr(recomputed, name), tolerance):
            report.add(OBJECTIVE_TAG, (name,), getattr(recorded, name), "=", getattr(recomputed, name))

    if report.violations:
        logger.info(f"Solution check found {len(report.violations)} violations: {report.tags()}")
    return report
