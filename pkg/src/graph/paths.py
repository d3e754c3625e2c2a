"""Endpoint-pair path enumeration over VNF graphs."""
import dataclasses
import logging
from typing import Dict, Tuple

import networkx as nx

from src.errors import ExpansionError
from src.graph.vnf_graph import GraphPath, Pair, VnfGraph

logger = logging.getLogger(__name__)


def enumerate_paths(graph: VnfGraph) -> VnfGraph:
    """Populate pair_paths with every simple path of each endpoint pair.

    Paths are ordered lexicographically by node sequence.

    Raises:
        ExpansionError: On a cycle, an unknown pair endpoint or a pair without a path
    """
    g = graph.digraph
    if not nx.is_directed_acyclic_graph(g):
        cycle = nx.find_cycle(g)
        raise ExpansionError(f"VNF graph has a cycle through {cycle[0][0]}")

    pair_paths: Dict[Pair, Tuple[GraphPath, ...]] = {}
    for src, dst in graph.pairs:
        for endpoint in (src, dst):
            if endpoint not in graph.nodes:
                raise ExpansionError(f"pair endpoint {endpoint} does not occur in the chain")
        node_paths = sorted(nx.all_simple_paths(g, src, dst))
        if not node_paths:
            raise ExpansionError(f"no path from {src} to {dst} in the VNF graph")
        pair_paths[(src, dst)] = tuple(
            tuple(zip(nodes[:-1], nodes[1:])) for nodes in node_paths
        )
        logger.debug(f"Pair ({src}, {dst}): {len(node_paths)} paths")

    return dataclasses.replace(graph, pair_paths=pair_paths)
