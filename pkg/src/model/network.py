"""Substrate network: switch and data-center nodes joined by directed links."""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Mapping, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from src.errors import ModelValidationError
from src.model.numbers import Rational
from src.utils.documents import read_json, validate_document, write_json

logger = logging.getLogger(__name__)

EdgeKey = Tuple[str, str]


class NodeSpec(BaseModel):
    """One node of the network file."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    id: str = Field(min_length=1)
    c_d: Rational
    c_s: Rational


class EdgeSpec(BaseModel):
    """One directed edge of the network file."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    src: str
    dst: str
    d: Rational
    l: Rational  # noqa: E741


class NetworkDocument(BaseModel):
    """On-disk network schema: ``nodes: [{id, c_d, c_s}]``, ``edges: [{src, dst, d, l}]``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    nodes: List[NodeSpec]
    edges: List[EdgeSpec]


@dataclass(frozen=True)
class NodeCapacity:
    """Data-center and switch compute capacity of a node."""

    datacenter: Fraction
    switch: Fraction


@dataclass(frozen=True)
class Link:
    """Data rate capacity and latency of a directed edge."""

    rate: Fraction
    latency: Fraction


@dataclass(frozen=True)
class SubstrateNetwork:
    """Connected directed graph with dual node capacities.

    Self-loops are ordinary edges: they carry traffic between functions
    co-located on the same node and have their own rate and latency.
    """

    capacities: Mapping[str, NodeCapacity]
    links: Mapping[EdgeKey, Link]
    node_order: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.node_order:
            object.__setattr__(self, "node_order", tuple(self.capacities))
        self.validate()

    @property
    def nodes(self) -> Tuple[str, ...]:
        return self.node_order

    @property
    def edges(self) -> Tuple[EdgeKey, ...]:
        return tuple(self.links)

    def has_edge(self, src: str, dst: str) -> bool:
        return (src, dst) in self.links

    def rate(self, edge: EdgeKey) -> Fraction:
        return self.links[edge].rate

    def latency(self, edge: EdgeKey) -> Fraction:
        return self.links[edge].latency

    def dc_capacity(self, node: str) -> Fraction:
        return self.capacities[node].datacenter

    def switch_capacity(self, node: str) -> Fraction:
        return self.capacities[node].switch

    def out_edges(self, node: str) -> List[EdgeKey]:
        return self._adjacency[0].get(node, [])

    def in_edges(self, node: str) -> List[EdgeKey]:
        return self._adjacency[1].get(node, [])

    @cached_property
    def _adjacency(self) -> Tuple[Dict[str, List[EdgeKey]], Dict[str, List[EdgeKey]]]:
        out: Dict[str, List[EdgeKey]] = {}
        inc: Dict[str, List[EdgeKey]] = {}
        for edge in self.links:
            out.setdefault(edge[0], []).append(edge)
            inc.setdefault(edge[1], []).append(edge)
        return out, inc

    @cached_property
    def graph(self) -> nx.DiGraph:
        """networkx view of the topology, with ``rate`` and ``latency`` edge data."""
        g = nx.DiGraph()
        g.add_nodes_from(self.node_order)
        for (src, dst), link in self.links.items():
            g.add_edge(src, dst, rate=link.rate, latency=link.latency)
        return g

    @cached_property
    def transit_graph(self) -> nx.DiGraph:
        """The topology without self-loops, used for routing between distinct nodes."""
        g = self.graph.copy()
        g.remove_edges_from(list(nx.selfloop_edges(g)))
        return g

    def validate(self) -> None:
        """Check the type invariants, raising ModelValidationError on the first violation."""
        if not self.capacities:
            raise ModelValidationError("network has no nodes")
        for node, capacity in self.capacities.items():
            if capacity.datacenter < 0 or capacity.switch < 0:
                raise ModelValidationError(f"node {node} has a negative capacity")
        for (src, dst), link in self.links.items():
            if src not in self.capacities or dst not in self.capacities:
                raise ModelValidationError(f"edge ({src}, {dst}) references an unknown node")
            if link.rate < 0 or link.latency < 0:
                raise ModelValidationError(f"edge ({src}, {dst}) has a negative rate or latency")
        if not nx.is_weakly_connected(self.transit_graph):
            raise ModelValidationError("network is not connected (self-loops ignored)")

    def to_document(self) -> NetworkDocument:
        return NetworkDocument(
            nodes=[
                NodeSpec(id=node, c_d=self.capacities[node].datacenter, c_s=self.capacities[node].switch)
                for node in self.node_order
            ],
            edges=[
                EdgeSpec(src=src, dst=dst, d=link.rate, l=link.latency)
                for (src, dst), link in self.links.items()
            ],
        )


def network_from_document(document: NetworkDocument) -> SubstrateNetwork:
    """Build a validated network from its parsed document."""
    capacities: Dict[str, NodeCapacity] = {}
    for node in document.nodes:
        if node.id in capacities:
            raise ModelValidationError(f"duplicate node id {node.id}")
        capacities[node.id] = NodeCapacity(datacenter=node.c_d, switch=node.c_s)

    links: Dict[EdgeKey, Link] = {}
    for edge in document.edges:
        key = (edge.src, edge.dst)
        if key in links:
            raise ModelValidationError(f"duplicate edge ({edge.src}, {edge.dst})")
        links[key] = Link(rate=edge.d, latency=edge.l)

    return SubstrateNetwork(capacities=capacities, links=links, node_order=tuple(capacities))


def network_from_dict(data: dict, source: str = "network") -> SubstrateNetwork:
    """Validate decoded JSON and build the network."""
    document = validate_document(data, NetworkDocument, source)
    return network_from_document(document)


def load_network(path: Union[str, Path]) -> SubstrateNetwork:
    """Load and validate a network file.

    Args:
        path: JSON file with ``nodes`` and ``edges``

    Returns:
        Validated SubstrateNetwork
    """
    net = network_from_dict(read_json(path), source=str(path))
    self_loops = sum(1 for src, dst in net.edges if src == dst)
    logger.info(
        f"Loaded network {path}: {len(net.nodes)} nodes, {len(net.edges)} edges "
        f"({self_loops} self-loops)"
    )
    return net


def save_network(net: SubstrateNetwork, path: Union[str, Path]) -> Path:
    """Write a network in the format read by load_network."""
    return write_json(path, net.to_document().model_dump(mode="json"))
