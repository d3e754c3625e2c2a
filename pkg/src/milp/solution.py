"""Placement solutions: derived metrics, extraction from variable values, JSON archive."""
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict

from src.graph.vnf_graph import EdgeKey, VnfGraph
from src.milp.instance import Objective, PlacementInstance
from src.model.catalog import FunctionCatalog, Role
from src.model.network import SubstrateNetwork
from src.model.numbers import Rational
from src.utils.documents import read_json, validate_document, write_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoleAssignment:
    """The (ms, md) values of a use at its node."""

    switch: int
    datacenter: int

    @classmethod
    def of(cls, role: Role) -> "RoleAssignment":
        return cls(switch=int(role is Role.SWITCH), datacenter=int(role is Role.DATACENTER))


@dataclass(frozen=True)
class RoutedPath:
    """Substrate edges realizing one VNF graph edge from source to target."""

    source: str
    target: str
    edges: Tuple[EdgeKey, ...]


@dataclass(frozen=True)
class ObjectiveValues:
    remdr: Fraction
    used_nodes: int
    latency: Fraction
    path_count: int = 0

    @property
    def mean_latency(self) -> Fraction:
        """Latency objective divided by the number of paths it sums over."""
        return self.latency / self.path_count if self.path_count else Fraction(0)

    def value(self, objective: Objective):
        if objective is Objective.REMDR:
            return self.remdr
        if objective is Objective.USED_NODES:
            return self.used_nodes
        return self.latency


@dataclass(frozen=True)
class PlacementSolution:
    mapping: Mapping[str, str]
    roles: Mapping[str, RoleAssignment]
    instance_count: Mapping[Tuple[str, str], int]
    path_edges: Mapping[EdgeKey, RoutedPath]
    used_nodes: FrozenSet[str]
    remaining_rate: Mapping[EdgeKey, Fraction]
    path_latency: Mapping[EdgeKey, Fraction]
    objective_values: ObjectiveValues


def edge_loads(
    net: SubstrateNetwork,
    graph: VnfGraph,
    paths: Mapping[EdgeKey, RoutedPath],
) -> Dict[EdgeKey, Fraction]:
    loads = {edge: Fraction(0) for edge in net.edges}
    for graph_edge, path in paths.items():
        rate = graph.rate(graph_edge)
        for edge in path.edges:
            if edge in loads:
                loads[edge] += rate
    return loads


def path_latencies(net: SubstrateNetwork, paths: Mapping[EdgeKey, RoutedPath]) -> Dict[EdgeKey, Fraction]:
    return {
        graph_edge: sum((net.latency(e) for e in path.edges if net.has_edge(*e)), Fraction(0))
        for graph_edge, path in paths.items()
    }


def compute_objectives(
    net: SubstrateNetwork,
    graph: VnfGraph,
    mapping: Mapping[str, str],
    paths: Mapping[EdgeKey, RoutedPath],
) -> ObjectiveValues:
    """Metric values from the mapping and the routed paths alone."""
    loads = edge_loads(net, graph, paths)
    remdr = sum((net.rate(e) - loads[e] for e in net.edges if e[0] != e[1]), Fraction(0))
    used = {mapping[u] for u in graph.uses if u in mapping}
    latencies = path_latencies(net, paths)
    weights = graph.latency_weights
    latency = sum((weights.get(k, 0) * lat for k, lat in latencies.items()), Fraction(0))
    return ObjectiveValues(remdr=remdr, used_nodes=len(used), latency=latency, path_count=graph.path_count)


def assemble_solution(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    mapping: Mapping[str, str],
    roles: Mapping[str, RoleAssignment],
    paths: Mapping[EdgeKey, RoutedPath],
) -> PlacementSolution:
    """Derive instances, used nodes and all metrics for a mapping with its roles and paths."""
    instance_count: Dict[Tuple[str, str], int] = {}
    for u in graph.uses:
        if u in mapping:
            instance_count[(graph.function(u), mapping[u])] = 1
    used_nodes = frozenset(v for _, v in instance_count)
    loads = edge_loads(net, graph, paths)
    return PlacementSolution(
        mapping=dict(mapping),
        roles=dict(roles),
        instance_count=instance_count,
        path_edges=dict(paths),
        used_nodes=used_nodes,
        remaining_rate={e: net.rate(e) - loads[e] for e in net.edges},
        path_latency=path_latencies(net, paths),
        objective_values=compute_objectives(net, graph, mapping, paths),
    )


def _order_walk(edges: List[EdgeKey], start: str) -> Tuple[EdgeKey, ...]:
    """Order edges as a walk from start where possible, remaining edges last."""
    remaining = list(edges)
    ordered: List[EdgeKey] = []
    node = start
    while True:
        step = next((e for e in remaining if e[0] == node), None)
        if step is None:
            break
        ordered.append(step)
        remaining.remove(step)
        node = step[1]
        if step[0] == step[1]:
            break
    return tuple(ordered + sorted(remaining))


def extract_solution(
    instance: PlacementInstance,
    values: Sequence[Fraction],
    clean_cycles: bool = True,
) -> PlacementSolution:
    """Read a placement out of a variable assignment.

    With clean_cycles, each graph edge keeps only a simple path from its
    source to its target among the selected edges; stray cycles that do not
    change feasibility are dropped.
    """
    ctx = instance.context
    graph = ctx.graph
    mapping: Dict[str, str] = {}
    for (node_id, v), var in instance.family("m").items():
        if values[var] == 1:
            mapping.setdefault(node_id, v)

    roles: Dict[str, RoleAssignment] = {}
    for u in graph.uses:
        v = mapping.get(u)
        if v is None:
            continue
        ms = instance.var("ms", u, v)
        md = instance.var("md", u, v)
        roles[u] = RoleAssignment(switch=int(values[ms]), datacenter=int(values[md]))

    selected: Dict[EdgeKey, List[EdgeKey]] = {k: [] for k in graph.edge_keys}
    for (v, w, x, y, u, u2), var in instance.family("e").items():
        if values[var] == 1 and mapping.get(u) == x and mapping.get(u2) == y:
            selected[(u, u2)].append((v, w))

    paths: Dict[EdgeKey, RoutedPath] = {}
    for (u, u2), edges in selected.items():
        x, y = mapping.get(u), mapping.get(u2)
        if x is None or y is None:
            continue
        chosen = _order_walk(edges, x)
        if clean_cycles:
            if x == y and (x, x) in edges:
                chosen = ((x, x),)
            elif x != y:
                sub = nx.DiGraph(edges)
                if sub.has_node(x) and sub.has_node(y) and nx.has_path(sub, x, y):
                    nodes = nx.shortest_path(sub, x, y)
                    chosen = tuple(zip(nodes[:-1], nodes[1:]))
        paths[(u, u2)] = RoutedPath(source=x, target=y, edges=chosen)

    return assemble_solution(ctx.net, ctx.catalog, graph, mapping, roles, paths)


# JSON archive


class RoleDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    use: str
    ms: int
    md: int


class InstanceDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    function: str
    node: str
    count: int


class PathDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    src: str
    dst: str
    source: str
    target: str
    edges: List[Tuple[str, str]]


class EdgeValueDocument(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    src: str
    dst: str
    value: Rational


class ObjectivesDocument(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    remdr: Rational
    used_nodes: int
    latency: Rational
    mean_latency: Rational
    path_count: int


class SolutionDocument(BaseModel):
    """Archived placement solution."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    label: str = ""
    mapping: Dict[str, str]
    roles: List[RoleDocument]
    instances: List[InstanceDocument]
    paths: List[PathDocument]
    used_nodes: List[str]
    remaining_rate: List[EdgeValueDocument]
    path_latency: List[EdgeValueDocument]
    objectives: ObjectivesDocument


def solution_to_document(solution: PlacementSolution, label: str = "") -> SolutionDocument:
    ov = solution.objective_values
    return SolutionDocument(
        label=label,
        mapping=dict(solution.mapping),
        roles=[RoleDocument(use=u, ms=r.switch, md=r.datacenter) for u, r in solution.roles.items()],
        instances=[
            InstanceDocument(function=f, node=v, count=c) for (f, v), c in solution.instance_count.items()
        ],
        paths=[
            PathDocument(src=k[0], dst=k[1], source=p.source, target=p.target, edges=list(p.edges))
            for k, p in solution.path_edges.items()
        ],
        used_nodes=sorted(solution.used_nodes),
        remaining_rate=[
            EdgeValueDocument(src=e[0], dst=e[1], value=r) for e, r in solution.remaining_rate.items()
        ],
        path_latency=[
            EdgeValueDocument(src=k[0], dst=k[1], value=lat) for k, lat in solution.path_latency.items()
        ],
        objectives=ObjectivesDocument(
            remdr=ov.remdr,
            used_nodes=ov.used_nodes,
            latency=ov.latency,
            mean_latency=ov.mean_latency,
            path_count=ov.path_count,
        ),
    )


def solution_from_document(document: SolutionDocument) -> PlacementSolution:
    return PlacementSolution(
        mapping=dict(document.mapping),
        roles={r.use: RoleAssignment(switch=r.ms, datacenter=r.md) for r in document.roles},
        instance_count={(i.function, i.node): i.count for i in document.instances},
        path_edges={
            (p.src, p.dst): RoutedPath(source=p.source, target=p.target, edges=tuple(tuple(e) for e in p.edges))
            for p in document.paths
        },
        used_nodes=frozenset(document.used_nodes),
        remaining_rate={(e.src, e.dst): e.value for e in document.remaining_rate},
        path_latency={(e.src, e.dst): e.value for e in document.path_latency},
        objective_values=ObjectiveValues(
            remdr=document.objectives.remdr,
            used_nodes=document.objectives.used_nodes,
            latency=document.objectives.latency,
            path_count=document.objectives.path_count,
        ),
    )


def save_solution(solution: PlacementSolution, path: Union[str, Path], label: str = "") -> Path:
    return write_json(path, solution_to_document(solution, label).model_dump(mode="json"))


def load_solution(path: Union[str, Path]) -> PlacementSolution:
    """Load an archived solution; derived fields are kept as stored so they can be checked."""
    document = validate_document(read_json(path), SolutionDocument, str(path))
    return solution_from_document(document)


def solution_signature(solution: Optional[PlacementSolution]) -> Tuple:
    """Hashable summary used to deduplicate solutions."""
    if solution is None:
        return ()
    return (
        tuple(sorted(solution.mapping.items())),
        tuple(sorted((k, p.edges) for k, p in solution.path_edges.items())),
    )
