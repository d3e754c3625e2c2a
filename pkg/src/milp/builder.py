"""Construction of the linearized placement model."""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.config import get_config
from src.errors import BuildError
from src.graph.vnf_graph import EdgeKey, VnfGraph
from src.milp.instance import (
    ConstraintTag,
    Objective,
    PlacementInstance,
    Relation,
    VarKind,
)
from src.model.catalog import FunctionCatalog
from src.model.network import SubstrateNetwork

logger = logging.getLogger(__name__)

Tag = ConstraintTag
LE, EQ = Relation.LE, Relation.EQ


@dataclass(frozen=True)
class BuildContext:
    """Inputs an instance was built from, kept for solution extraction."""

    net: SubstrateNetwork
    catalog: FunctionCatalog
    graph: VnfGraph
    hosts: Dict[str, Tuple[str, ...]]
    prune: bool

    def candidate_edges(self, x: str, y: str) -> List[EdgeKey]:
        return candidate_edges(self.net, x, y, self.prune)


def can_host(net: SubstrateNetwork, catalog: FunctionCatalog, function: str, node: str) -> bool:
    """A node can run a function in at least one role."""
    spec = catalog[function]
    dc_fits = spec.dc_demand > 0 and net.dc_capacity(node) >= spec.dc_demand
    switch_fits = spec.switch_demand > 0 and net.switch_capacity(node) >= spec.switch_demand
    return dc_fits or switch_fits


def host_candidates(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    prune: bool,
) -> Dict[str, Tuple[str, ...]]:
    hosts: Dict[str, Tuple[str, ...]] = {}
    for node in graph.nodes.values():
        if not prune:
            hosts[node.id] = net.nodes
        elif node.is_use:
            hosts[node.id] = tuple(v for v in net.nodes if can_host(net, catalog, node.function, v))
        else:
            hosts[node.id] = (node.location,)
    return hosts


def candidate_edges(net: SubstrateNetwork, x: str, y: str, prune: bool) -> List[EdgeKey]:
    """Substrate edges that may carry a path from x to y."""
    if not prune:
        return list(net.edges)
    if x == y:
        return [(x, x)] if net.has_edge(x, x) else []
    return [
        (v, w) for v, w in net.edges if v != w and w != x and v != y
    ]


def _check_references(net: SubstrateNetwork, catalog: FunctionCatalog, graph: VnfGraph) -> None:
    for node in graph.nodes.values():
        if node.is_use and node.function not in catalog:
            raise BuildError(f"graph node {node.id} uses unknown function {node.function}")
        if not node.is_use and node.location not in net.capacities:
            raise BuildError(f"endpoint {node.id} located at unknown node {node.location}")


def build_instance(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    prune: Optional[bool] = None,
) -> PlacementInstance:
    """Build the linearized placement model for a (combined) VNF graph.

    Args:
        net: Substrate network
        catalog: Function catalog
        graph: VNF graph with pair paths populated
        prune: Restrict mappings and path variables to capable hosts; defaults to config

    Returns:
        PlacementInstance with rows tagged by constraint family
    """
    if prune is None:
        prune = get_config().prune_paths
    _check_references(net, catalog, graph)

    inst = PlacementInstance()
    hosts = host_candidates(net, catalog, graph, prune)
    inst.context = BuildContext(net=net, catalog=catalog, graph=graph, hosts=hosts, prune=prune)
    uses = graph.uses
    big_m = len(uses) + 1
    big_m_used = len(catalog) + 1

    # Mapping variables
    for node_id, candidates in hosts.items():
        for v in candidates:
            inst.add_var("m", (node_id, v))
    for u in uses:
        for v in hosts[u]:
            inst.add_var("ms", (u, v))
            inst.add_var("md", (u, v))
    for f in catalog.ids:
        for v in net.nodes:
            inst.add_var("i", (f, v))
    for v in net.nodes:
        inst.add_var("used", (v,))

    # (a) each node mapped exactly once, (b) endpoints at their location
    for node_id, candidates in hosts.items():
        inst.add_constraint(
            [(1, inst.var("m", node_id, v)) for v in candidates], EQ, 1, Tag.UNIQUE_MAPPING, (node_id,)
        )
    for a in graph.endpoints:
        loc = graph.location(a)
        m = inst.var("m", a, loc)
        if m is None:
            raise BuildError(f"endpoint {a} cannot be mapped to {loc}")
        inst.add_constraint([(1, m)], EQ, 1, Tag.ENDPOINT_MAPPING, (a, loc))

    # (c) instances exist exactly where requests are mapped
    for f in catalog.ids:
        for v in net.nodes:
            users = [inst.var("m", u, v) for u in uses if graph.function(u) == f and v in hosts[u]]
            i = inst.var("i", f, v)
            inst.add_constraint([(1, m) for m in users] + [(-big_m, i)], LE, 0, Tag.INSTANCE_COUPLING, (f, v))
            inst.add_constraint([(1, i)] + [(-1, m) for m in users], LE, 0, Tag.INSTANCE_COUPLING, (f, v))

    # (d) one role per mapping, (e) forced roles
    for u in uses:
        spec = catalog[graph.function(u)]
        for v in hosts[u]:
            ms, md = inst.var("ms", u, v), inst.var("md", u, v)
            inst.add_constraint([(1, ms), (1, md)], EQ, 1, Tag.ROLE_EXCLUSIVE, (u, v))
            if spec.datacenter_only:
                inst.add_constraint([(1, ms)], EQ, 0, Tag.FORCED_ROLE, (u, v))
                inst.add_constraint([(1, md)], EQ, 1, Tag.FORCED_ROLE, (u, v))
            elif spec.switch_only:
                inst.add_constraint([(1, md)], EQ, 0, Tag.FORCED_ROLE, (u, v))
                inst.add_constraint([(1, ms)], EQ, 1, Tag.FORCED_ROLE, (u, v))

    # (f) node capacities over linearized m*md and m*ms
    for v in net.nodes:
        dc_terms, switch_terms = [], []
        for u in uses:
            if v not in hosts[u]:
                continue
            spec = catalog[graph.function(u)]
            m = inst.var("m", u, v)
            if spec.dc_demand > 0:
                dc_terms.append((spec.dc_demand, inst.linearize(m, inst.var("md", u, v))))
            if spec.switch_demand > 0:
                switch_terms.append((spec.switch_demand, inst.linearize(m, inst.var("ms", u, v))))
        inst.add_constraint(dc_terms, LE, net.dc_capacity(v), Tag.NODE_CAPACITY, (v, "datacenter"))
        inst.add_constraint(switch_terms, LE, net.switch_capacity(v), Tag.NODE_CAPACITY, (v, "switch"))

    # (g) instance cap, (h) requests per instance
    for f in catalog.ids:
        spec = catalog[f]
        inst.add_constraint(
            [(1, inst.var("i", f, v)) for v in net.nodes], LE, spec.max_instances, Tag.INSTANCE_LIMIT, (f,)
        )
        for v in net.nodes:
            users = [inst.var("m", u, v) for u in uses if graph.function(u) == f and v in hosts[u]]
            inst.add_constraint([(1, m) for m in users], LE, spec.max_requests, Tag.REQUEST_LIMIT, (v, f))

    # (p) used-node marking
    for v in net.nodes:
        instances = [inst.var("i", f, v) for f in catalog.ids]
        used = inst.var("used", v)
        inst.add_constraint([(1, i) for i in instances] + [(-big_m_used, used)], LE, 0, Tag.USED_MARKING, (v,))
        inst.add_constraint([(1, used)] + [(-1, i) for i in instances], LE, 0, Tag.USED_MARKING, (v,))

    _add_paths(inst, net, graph, hosts, prune)
    _add_metrics(inst, net, graph)

    logger.info(f"Built placement instance for {graph.label or graph.request_ids}: {inst.summary()}")
    return inst


def _add_paths(
    inst: PlacementInstance,
    net: SubstrateNetwork,
    graph: VnfGraph,
    hosts: Dict[str, Tuple[str, ...]],
    prune: bool,
) -> None:
    for u, u2 in graph.edge_keys:
        starts, ends = [], []
        for x in hosts[u]:
            for y in hosts[u2]:
                mm = inst.linearize(inst.var("m", u, x), inst.var("m", u2, y), family="mm", key=(u, x, u2, y))
                edges = candidate_edges(net, x, y, prune)
                e = {(v, w): inst.add_var("e", (v, w, x, y, u, u2)) for v, w in edges}

                # (i) path edges only between the mapped nodes
                for var in e.values():
                    inst.add_constraint([(1, var), (-1, mm)], LE, 0, Tag.EDGE_ACTIVATION, (u, u2, x, y))

                out_x = [var for (v, _), var in e.items() if v == x]
                in_x = [var for (v, w), var in e.items() if w == x and v != w]
                in_y = [var for (_, w), var in e.items() if w == y]
                out_y = [var for (v, w), var in e.items() if v == y and v != w]
                starts.extend(out_x)
                ends.extend(in_y)

                # (j) path leaves x once, (k) path reaches y once
                inst.add_constraint([(1, var) for var in out_x] + [(-1, mm)], EQ, 0, Tag.PATH_START, (u, u2, x, y))
                inst.add_constraint([(1, var) for var in in_y] + [(-1, mm)], EQ, 0, Tag.PATH_END, (u, u2, x, y))
                if x != y:
                    if in_x:
                        inst.add_constraint([(1, var) for var in in_x], EQ, 0, Tag.PATH_START, (u, u2, x, y))
                    if out_y:
                        inst.add_constraint([(1, var) for var in out_y], EQ, 0, Tag.PATH_END, (u, u2, x, y))

                # (l) flow preservation elsewhere
                touched = sorted({n for edge in edges for n in edge} - {x, y})
                for w in touched:
                    terms = [(1, var) for (v, t), var in e.items() if t == w]
                    terms += [(-1, var) for (v, t), var in e.items() if v == w]
                    inst.add_constraint(terms, EQ, 0, Tag.FLOW_PRESERVATION, (u, u2, x, y, w))

                # (m) no self-loops off the co-located case, no anti-parallel pairs
                for (v, w), var in e.items():
                    if x != y and v == w:
                        inst.add_constraint([(1, var)], EQ, 0, Tag.LOOP_RESTRICTION, (u, u2, x, y, v, w))
                    elif x == y and (v, w) != (x, x):
                        inst.add_constraint([(1, var)], EQ, 0, Tag.LOOP_RESTRICTION, (u, u2, x, y, v, w))
                for (v, w), var in e.items():
                    back = e.get((w, v))
                    if v < w and back is not None:
                        inst.add_constraint([(1, var), (1, back)], LE, 1, Tag.LOOP_RESTRICTION, (u, u2, x, y, v, w))

        # (j)/(k) exactly one start and one end over all host pairs
        inst.add_constraint([(1, var) for var in starts], EQ, 1, Tag.PATH_START, (u, u2))
        inst.add_constraint([(1, var) for var in ends], EQ, 1, Tag.PATH_END, (u, u2))


def _add_metrics(inst: PlacementInstance, net: SubstrateNetwork, graph: VnfGraph) -> None:
    by_net_edge: Dict[EdgeKey, List[Tuple[Fraction, int]]] = {edge: [] for edge in net.edges}
    by_graph_edge: Dict[EdgeKey, List[Tuple[Fraction, int]]] = {edge: [] for edge in graph.edge_keys}
    for (v, w, _, _, u, u2), var in inst.family("e").items():
        by_net_edge[(v, w)].append((graph.rate((u, u2)), var))
        by_graph_edge[(u, u2)].append((net.latency((v, w)), var))

    # (n) edge capacity, (q) remaining data rate
    for edge in net.edges:
        d = net.rate(edge)
        inst.add_constraint(by_net_edge[edge], LE, d, Tag.EDGE_CAPACITY, edge)
        remdr = inst.add_var("remdr", edge, kind=VarKind.CONTINUOUS, lb=0, ub=d)
        row = inst.add_constraint([(1, remdr)] + by_net_edge[edge], EQ, d, Tag.REMAINING_RATE, edge)
        inst.definitions[remdr] = row

    # (r) per graph edge latency
    total_latency = sum((net.latency(e) for e in net.edges), Fraction(0))
    for edge in graph.edge_keys:
        lat = inst.add_var("lat", edge, kind=VarKind.CONTINUOUS, lb=0, ub=total_latency)
        terms = [(-coef, var) for coef, var in by_graph_edge[edge]]
        row = inst.add_constraint([(1, lat)] + terms, EQ, 0, Tag.PATH_LATENCY, edge)
        inst.definitions[lat] = row

    # (o) latency bound over the edges of all paths of the pair
    for pair, bound in graph.latency_bounds.items():
        terms = []
        for edge in graph.bounded_edges(pair):
            terms.extend(by_graph_edge[edge])
        inst.add_constraint(terms, LE, bound, Tag.LATENCY_BOUND, pair)

    weights = graph.latency_weights
    inst.objectives[Objective.REMDR] = {
        var: Fraction(1) for (v, w), var in inst.family("remdr").items() if v != w
    }
    inst.objectives[Objective.USED_NODES] = {var: Fraction(1) for var in inst.family("used").values()}
    inst.objectives[Objective.LATENCY] = {
        inst.var("lat", *edge): Fraction(weights[edge]) for edge in graph.edge_keys if weights[edge]
    }
