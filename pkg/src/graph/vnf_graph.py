"""VNF graph: the expanded form of one or more chaining requests."""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Tuple

import networkx as nx

EdgeKey = Tuple[str, str]
Pair = Tuple[str, str]
GraphPath = Tuple[EdgeKey, ...]


class NodeKind(str, Enum):
    USE = "use"
    ENDPOINT = "endpoint"


@dataclass(frozen=True)
class GraphNode:
    """A function use (possibly a parallel replica) or a fixed endpoint."""

    id: str
    kind: NodeKind
    request_id: str
    origin: str
    function: Optional[str] = None
    location: Optional[str] = None

    @property
    def is_use(self) -> bool:
        return self.kind is NodeKind.USE


@dataclass(frozen=True)
class GraphEdge:
    """Flow between two graph nodes with its data rate demand d_req."""

    src: str
    dst: str
    rate: Fraction
    branch: int = 0

    @property
    def key(self) -> EdgeKey:
        return (self.src, self.dst)


@dataclass(frozen=True)
class VnfGraph:
    """Connected DAG (or disjoint union of DAGs) with rates, endpoint pairs and their paths."""

    request_ids: Tuple[str, ...]
    nodes: Mapping[str, GraphNode]
    edges: Tuple[GraphEdge, ...]
    pairs: Tuple[Pair, ...] = ()
    latency_bounds: Mapping[Pair, Fraction] = field(default_factory=dict)
    pair_paths: Mapping[Pair, Tuple[GraphPath, ...]] = field(default_factory=dict)
    ordering: Tuple[Tuple[str, ...], ...] = ()
    label: str = ""

    @property
    def uses(self) -> List[str]:
        return [n.id for n in self.nodes.values() if n.is_use]

    @property
    def endpoints(self) -> List[str]:
        return [n.id for n in self.nodes.values() if not n.is_use]

    @property
    def edge_keys(self) -> List[EdgeKey]:
        return [e.key for e in self.edges]

    @cached_property
    def _edge_index(self) -> Dict[EdgeKey, GraphEdge]:
        return {e.key: e for e in self.edges}

    def edge(self, key: EdgeKey) -> GraphEdge:
        return self._edge_index[key]

    def rate(self, key: EdgeKey) -> Fraction:
        return self._edge_index[key].rate

    def function(self, node_id: str) -> Optional[str]:
        return self.nodes[node_id].function

    def location(self, node_id: str) -> Optional[str]:
        return self.nodes[node_id].location

    def out_edges(self, node_id: str) -> List[GraphEdge]:
        return [e for e in self.edges if e.src == node_id]

    def in_edges(self, node_id: str) -> List[GraphEdge]:
        return [e for e in self.edges if e.dst == node_id]

    @property
    def total_rate(self) -> Fraction:
        return sum((e.rate for e in self.edges), Fraction(0))

    @cached_property
    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for node in self.nodes:
            g.add_node(node)
        for e in self.edges:
            g.add_edge(e.src, e.dst, rate=e.rate, branch=e.branch)
        return g

    def bounded_edges(self, pair: Pair) -> List[EdgeKey]:
        """Union of graph edges on any path of the pair, in first-seen order."""
        seen: List[EdgeKey] = []
        for path in self.pair_paths.get(pair, ()):
            for key in path:
                if key not in seen:
                    seen.append(key)
        return seen

    @cached_property
    def latency_weights(self) -> Dict[EdgeKey, int]:
        """How many paths of latency-bounded pairs run over each edge."""
        weights: Dict[EdgeKey, int] = {key: 0 for key in self.edge_keys}
        for pair in self.latency_bounds:
            for path in self.pair_paths.get(pair, ()):
                for key in path:
                    weights[key] += 1
        return weights

    @property
    def path_count(self) -> int:
        """Number of paths entering the latency objective."""
        return sum(len(self.pair_paths.get(pair, ())) for pair in self.latency_bounds)

    def describe(self) -> str:
        return (
            f"{self.label or ','.join(self.request_ids)}: {len(self.uses)} uses, "
            f"{len(self.endpoints)} endpoints, {len(self.edges)} edges"
        )
