"""Disjoint union of per-request VNF graphs into one placement input."""
import itertools
import logging
from typing import Dict, Iterator, List, Sequence

from src.errors import ExpansionError
from src.graph.expansion import ExpansionSet
from src.graph.vnf_graph import GraphEdge, GraphNode, VnfGraph

logger = logging.getLogger(__name__)


def namespaced(request_id: str, node_id: str) -> str:
    return f"{request_id}/{node_id}"


def combine(graphs: Sequence[VnfGraph]) -> VnfGraph:
    """Union graphs of distinct requests, prefixing node ids with the request id.

    Function identity is kept on every use so instances may be shared across
    requests during placement.

    Raises:
        ExpansionError: When two graphs belong to the same request
    """
    if not graphs:
        raise ExpansionError("nothing to combine")

    seen: List[str] = []
    for graph in graphs:
        if len(graph.request_ids) != 1:
            raise ExpansionError("only single-request graphs can be combined")
        request_id = graph.request_ids[0]
        if request_id in seen:
            raise ExpansionError(f"duplicate request id {request_id} in combination")
        seen.append(request_id)

    nodes: Dict[str, GraphNode] = {}
    edges: List[GraphEdge] = []
    pairs = []
    latency_bounds = {}
    pair_paths = {}
    ordering = []
    for graph in graphs:
        rid = graph.request_ids[0]

        def ns(node_id: str, rid: str = rid) -> str:
            return namespaced(rid, node_id)

        for node in graph.nodes.values():
            nodes[ns(node.id)] = GraphNode(
                id=ns(node.id),
                kind=node.kind,
                request_id=rid,
                origin=node.origin,
                function=node.function,
                location=node.location,
            )
        for edge in graph.edges:
            edges.append(GraphEdge(src=ns(edge.src), dst=ns(edge.dst), rate=edge.rate, branch=edge.branch))
        for src, dst in graph.pairs:
            pairs.append((ns(src), ns(dst)))
        for (src, dst), bound in graph.latency_bounds.items():
            latency_bounds[(ns(src), ns(dst))] = bound
        for (src, dst), paths in graph.pair_paths.items():
            pair_paths[(ns(src), ns(dst))] = tuple(
                tuple((ns(a), ns(b)) for a, b in path) for path in paths
            )
        ordering.extend(graph.ordering)

    return VnfGraph(
        request_ids=tuple(seen),
        nodes=nodes,
        edges=tuple(edges),
        pairs=tuple(pairs),
        latency_bounds=latency_bounds,
        pair_paths=pair_paths,
        ordering=tuple(ordering),
        label="+".join(g.label or g.request_ids[0] for g in graphs),
    )


def combination_total(expansion_sets: Sequence[ExpansionSet]) -> int:
    total = 1
    for expansion in expansion_sets:
        total *= len(expansion.graphs)
    return total


def combinations(expansion_sets: Sequence[ExpansionSet]) -> Iterator[VnfGraph]:
    """Yield the combined graph of every element of the cross product of expansions."""
    logger.info(
        f"Enumerating {combination_total(expansion_sets)} combinations of "
        f"{len(expansion_sets)} requests"
    )
    for choice in itertools.product(*(e.graphs for e in expansion_sets)):
        yield combine(choice)
