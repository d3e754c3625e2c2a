"""DOT and JSON dumps of VNF graphs."""
from pathlib import Path
from typing import Any, List, Mapping, Optional, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict

from src.graph.vnf_graph import VnfGraph
from src.model.numbers import Rational, format_rational
from src.utils.documents import write_json


def _quote(text: Any) -> str:
    """DOT string literal; newlines become the DOT line break."""
    escaped = str(text).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def _attributes(attrs: Mapping[str, Any]) -> str:
    if not attrs:
        return ""
    return " [" + ", ".join(f"{key}={_quote(value)}" for key, value in sorted(attrs.items())) + "]"


def dot_digraph(graph: VnfGraph) -> nx.DiGraph:
    """The graph's digraph with DOT display attributes only."""
    g = nx.DiGraph(name=graph.label or "vnf")
    for node in graph.nodes.values():
        if node.is_use:
            g.add_node(node.id, label=f"{node.id}\n{node.function}", shape="box")
        else:
            g.add_node(node.id, label=f"{node.id}\n@{node.location}", shape="ellipse")
    for edge in graph.edges:
        g.add_edge(edge.src, edge.dst, label=format_rational(edge.rate))
    return g


def to_dot(graph: VnfGraph) -> str:
    """Render a graph as DOT; nodes show use and function, edges show d_req."""
    g = dot_digraph(graph)
    lines = [f"digraph {_quote(g.graph['name'])} {{", "  rankdir=LR;"]
    for node, attrs in g.nodes(data=True):
        lines.append(f"  {_quote(node)}{_attributes(attrs)};")
    for src, dst, attrs in g.edges(data=True):
        lines.append(f"  {_quote(src)} -> {_quote(dst)}{_attributes(attrs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(graph: VnfGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_dot(graph), encoding="utf-8")
    return path


class GraphNodeDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    kind: str
    request: str
    function: Optional[str] = None
    loc: Optional[str] = None


class GraphEdgeDocument(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    src: str
    dst: str
    d_req: Rational
    branch: int


class PairPathsDocument(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    src: str
    dst: str
    l_req: Optional[Rational] = None
    paths: List[List[str]]


class GraphDocument(BaseModel):
    """Inspection dump of one expanded graph."""

    model_config = ConfigDict(extra="forbid")

    label: str
    requests: List[str]
    ordering: List[List[str]]
    nodes: List[GraphNodeDocument]
    edges: List[GraphEdgeDocument]
    pairs: List[PairPathsDocument]


def graph_to_document(graph: VnfGraph) -> GraphDocument:
    pairs = []
    for pair in graph.pairs:
        paths = [[path[0][0]] + [dst for _, dst in path] for path in graph.pair_paths.get(pair, ())]
        pairs.append(
            PairPathsDocument(
                src=pair[0], dst=pair[1], l_req=graph.latency_bounds.get(pair), paths=paths
            )
        )
    return GraphDocument(
        label=graph.label,
        requests=list(graph.request_ids),
        ordering=[list(o) for o in graph.ordering],
        nodes=[
            GraphNodeDocument(
                id=n.id, kind=n.kind.value, request=n.request_id, function=n.function, loc=n.location
            )
            for n in graph.nodes.values()
        ],
        edges=[
            GraphEdgeDocument(src=e.src, dst=e.dst, d_req=e.rate, branch=e.branch)
            for e in graph.edges
        ],
        pairs=pairs,
    )


def write_graph(graph: VnfGraph, path: Union[str, Path]) -> Path:
    return write_json(path, graph_to_document(graph).model_dump(mode="json"))
