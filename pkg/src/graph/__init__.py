"""VNF graph expansion, path enumeration and request combination."""
from src.graph.combine import combination_total, combinations, combine
from src.graph.dot import graph_to_document, to_dot, write_dot, write_graph
from src.graph.expansion import ExpansionSet, combination_count, expand_all, expand_heuristic
from src.graph.paths import enumerate_paths
from src.graph.vnf_graph import GraphEdge, GraphNode, NodeKind, VnfGraph

__all__ = [
    "ExpansionSet",
    "GraphEdge",
    "GraphNode",
    "NodeKind",
    "VnfGraph",
    "combination_count",
    "combination_total",
    "combinations",
    "combine",
    "enumerate_paths",
    "expand_all",
    "expand_heuristic",
    "graph_to_document",
    "to_dot",
    "write_dot",
    "write_graph",
]
