"""Expansion of chain module trees into VNF graphs."""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx

from src.chain.ast import ChainAst, ModuleSeq, OptOrder, Parallel, Split, Term
from src.errors import ExpansionError
from src.graph.paths import enumerate_paths
from src.graph.vnf_graph import GraphEdge, GraphNode, NodeKind, VnfGraph
from src.model.requests import DeploymentRequest

logger = logging.getLogger(__name__)

Orderable = Union[OptOrder, Parallel]


@dataclass(frozen=True)
class ExpansionSet:
    """All VNF graphs of one request, one per combination of module orders."""

    request: str
    graphs: Tuple[VnfGraph, ...]
    combination_count: int


def combination_count(ast: ChainAst) -> int:
    """Product of the permutation counts of every orderable module."""
    count = 1
    for module in ast.orderable_modules():
        terms = module.terms if isinstance(module, OptOrder) else module.preamble
        count *= math.factorial(len(terms))
    return count


class _GraphBuilder:
    """Builds one graph for a fixed choice of module orders."""

    def __init__(
        self,
        request: DeploymentRequest,
        orders: Dict[int, Tuple[Term, ...]],
    ):
        self.request = request
        self.orders = orders
        self.nodes: Dict[str, GraphNode] = {}
        self.edges: Dict[Tuple[str, str], int] = {}

    def node(self, term: Term, suffix: str) -> str:
        symbol = term.symbol
        if self.request.is_endpoint(symbol):
            node_id = symbol
            if node_id not in self.nodes:
                self.nodes[node_id] = GraphNode(
                    id=node_id,
                    kind=NodeKind.ENDPOINT,
                    request_id=self.request.id,
                    origin=symbol,
                    location=self.request.endpoints[symbol],
                )
            return node_id

        use = self.request.use(symbol)
        if use is None:
            raise ExpansionError(f"request {self.request.id}: undeclared symbol {symbol}")
        node_id = symbol + suffix
        if node_id not in self.nodes:
            self.nodes[node_id] = GraphNode(
                id=node_id,
                kind=NodeKind.USE,
                request_id=self.request.id,
                origin=symbol,
                function=use.function,
            )
        return node_id

    def connect(self, src: str, dst: str, branch: int = 0) -> None:
        existing = self.edges.get((src, dst))
        if existing is not None and existing != branch:
            raise ExpansionError(
                f"request {self.request.id}: two branches of {src} both lead to {dst}"
            )
        self.edges[(src, dst)] = branch

    def require_orderable(self, term: Term, where: str) -> None:
        if self.request.is_endpoint(term.symbol):
            raise ExpansionError(
                f"request {self.request.id}: endpoint {term.symbol} cannot appear in {where}"
            )

    def require_single_branch(self, term: Term, where: str) -> None:
        use = self.request.use(term.symbol)
        if use is not None and use.splitting:
            raise ExpansionError(
                f"request {self.request.id}: splitting use {term.symbol} cannot appear in {where}"
            )

    def chain_terms(self, terms: Sequence[Term], suffix: str) -> Tuple[str, str]:
        ids = [self.node(t, suffix) for t in terms]
        for src, dst in zip(ids, ids[1:]):
            self.connect(src, dst)
        return ids[0], ids[-1]

    def build_seq(self, seq: ModuleSeq, suffix: str) -> Tuple[str, List[str]]:
        head: Optional[str] = None
        tails: List[str] = []
        for module in seq.modules:
            module_head, module_tails = self.build_module(module, suffix)
            if head is None:
                head = module_head
            for tail in tails:
                self.connect(tail, module_head)
            tails = module_tails
        return head, tails

    def build_module(self, module, suffix: str) -> Tuple[str, List[str]]:
        if isinstance(module, Term):
            node_id = self.node(module, suffix)
            return node_id, [node_id]

        if isinstance(module, OptOrder):
            order = self.orders[id(module)]
            for term in order:
                self.require_orderable(term, "an optional-order module")
                self.require_single_branch(term, "an optional-order module")
            head, tail = self.chain_terms(order, suffix)
            return head, [tail]

        if isinstance(module, Split):
            splitter = self.node(module.splitter, suffix)
            tails: List[str] = []
            for index, branch in enumerate(module.branches):
                branch_head, branch_tails = self.build_seq(branch, suffix)
                self.connect(splitter, branch_head, index)
                tails.extend(t for t in branch_tails if t not in tails)
            return splitter, tails

        if isinstance(module, Parallel):
            return self.build_parallel(module, suffix)

        raise ExpansionError(f"unknown module {module!r}")

    def build_parallel(self, module: Parallel, suffix: str) -> Tuple[str, List[str]]:
        order = self.orders[id(module)]
        split_at = next(i for i, t in enumerate(order) if t.symbol == module.splitter.symbol)
        for term in order:
            self.require_orderable(term, "a parallel preamble")
            if term.symbol != module.splitter.symbol:
                self.require_single_branch(term, "a parallel preamble")

        # Preamble before the splitter is placed once
        head, splitter = self.chain_terms(order[: split_at + 1], suffix)

        # Everything after the splitter is replicated per branch
        after = order[split_at + 1:]
        tails: List[str] = []
        for index in range(module.count):
            replica = f"{suffix}#{index + 1}"
            if after:
                branch_head, last = self.chain_terms(after, replica)
                body_head, body_tails = self.build_seq(module.body, replica)
                self.connect(last, body_head)
            else:
                branch_head, body_tails = self.build_seq(module.body, replica)
            self.connect(splitter, branch_head, index)
            tails.extend(t for t in body_tails if t not in tails)
        return head, tails

    def finish(self, label: str, ordering: Tuple[Tuple[str, ...], ...]) -> VnfGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        if not nx.is_directed_acyclic_graph(g):
            cycle = nx.find_cycle(g)
            raise ExpansionError(
                f"request {self.request.id}: chain revisits {cycle[0][0]} and forms a cycle"
            )

        # Rates flow from the sources through r(u) in topological order
        entering: Dict[str, Fraction] = {}
        rates: Dict[Tuple[str, str], Fraction] = {}
        for node_id in nx.lexicographical_topological_sort(g):
            incoming = [rates[(src, node_id)] for src in g.predecessors(node_id)]
            entering[node_id] = sum(incoming, Fraction(0)) if incoming else self.request.initial_rate

            node = self.nodes[node_id]
            ratios = self.request.uses[node.origin].ratios if node.is_use else (Fraction(1),)
            out = [(dst, self.edges[(node_id, dst)]) for dst in g.successors(node_id)]
            if out:
                branches = sorted(b for _, b in out)
                if branches != list(range(len(ratios))):
                    raise ExpansionError(
                        f"request {self.request.id}: {node_id} has {len(out)} outgoing branches "
                        f"but {len(ratios)} ratios"
                    )
            for dst, branch in out:
                rates[(node_id, dst)] = ratios[branch] * entering[node_id]

        edges = tuple(
            GraphEdge(src=src, dst=dst, rate=rates[(src, dst)], branch=branch)
            for (src, dst), branch in self.edges.items()
        )
        graph = VnfGraph(
            request_ids=(self.request.id,),
            nodes=dict(self.nodes),
            edges=edges,
            pairs=tuple(self.request.pairs),
            latency_bounds=dict(self.request.max_latency),
            ordering=ordering,
            label=label,
        )
        return enumerate_paths(graph)


def _module_terms(module: Orderable) -> Tuple[Term, ...]:
    return module.terms if isinstance(module, OptOrder) else module.preamble


def _build(
    ast: ChainAst,
    request: DeploymentRequest,
    modules: List[Orderable],
    choice: Sequence[Tuple[Term, ...]],
    label: str,
) -> VnfGraph:
    orders = {id(module): order for module, order in zip(modules, choice)}
    builder = _GraphBuilder(request, orders)
    builder.build_seq(ast.root, "")
    ordering = tuple(tuple(t.symbol for t in order) for order in choice)
    return builder.finish(label, ordering)


def _warn_unused(ast: ChainAst, request: DeploymentRequest) -> None:
    used = set(ast.symbols())
    for use_id in request.uses:
        if use_id not in used:
            logger.warning(f"request {request.id}: use {use_id} is declared but not in the chain")


def iter_graphs(ast: ChainAst, request: DeploymentRequest) -> Iterator[VnfGraph]:
    """Yield one graph per combination of module permutations, in preorder-product order."""
    modules = ast.orderable_modules()
    choices = [list(itertools.permutations(_module_terms(m))) for m in modules]
    for index, choice in enumerate(itertools.product(*choices)):
        yield _build(ast, request, modules, choice, f"{request.id}#{index}")


def expand_all(ast: ChainAst, request: DeploymentRequest) -> ExpansionSet:
    """Expand every combination of optional orders into its own graph.

    Args:
        ast: Parsed chain of the request
        request: Owning request (uses, ratios, endpoints, d_in)

    Returns:
        ExpansionSet with combination_count graphs
    """
    _warn_unused(ast, request)
    graphs = tuple(iter_graphs(ast, request))
    count = combination_count(ast)
    logger.info(f"Expanded request {request.id} into {len(graphs)} graphs")
    return ExpansionSet(request=request.id, graphs=graphs, combination_count=count)


def heuristic_order(terms: Sequence[Term], request: DeploymentRequest) -> Tuple[Term, ...]:
    """Stable ascending sort by total outgoing-to-incoming ratio."""

    def total(term: Term) -> Fraction:
        use = request.use(term.symbol)
        return use.total_ratio if use is not None else Fraction(1)

    return tuple(sorted(terms, key=total))


def expand_heuristic(ast: ChainAst, request: DeploymentRequest) -> VnfGraph:
    """Expand into the single graph with every orderable module sorted by ratio."""
    _warn_unused(ast, request)
    modules = ast.orderable_modules()
    choice = [heuristic_order(_module_terms(m), request) for m in modules]
    graph = _build(ast, request, modules, choice, f"{request.id}#heuristic")
    logger.info(f"Heuristic expansion of {request.id}: {graph.describe()}")
    return graph
