"""Module tree produced by the chain parser."""
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple, Union


@dataclass(frozen=True)
class Term:
    """A function use or endpoint symbol."""

    symbol: str
    position: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class ModuleSeq:
    """Modules traversed one after the other."""

    modules: Tuple["Module", ...]


@dataclass(frozen=True)
class OptOrder:
    """Terms whose traversal order may be chosen freely."""

    terms: Tuple[Term, ...]


@dataclass(frozen=True)
class Split:
    """A splitter whose outgoing branches carry distinct sub-chains."""

    splitter: Term
    branches: Tuple[ModuleSeq, ...]


@dataclass(frozen=True)
class Parallel:
    """A splitter with an orderable preamble and a body replicated ``count`` times."""

    splitter: Term
    preamble: Tuple[Term, ...]
    body: ModuleSeq
    count: int


Module = Union[Term, OptOrder, Split, Parallel]


@dataclass(frozen=True)
class ChainAst:
    root: ModuleSeq

    def walk(self) -> Iterator[Module]:
        """Yield every module in preorder."""
        return walk(self.root)

    def terms(self) -> List[Term]:
        """All leaf terms in source order."""
        found: List[Term] = []
        for module in self.walk():
            if isinstance(module, Term):
                found.append(module)
            elif isinstance(module, OptOrder):
                found.extend(module.terms)
            elif isinstance(module, Split):
                found.append(module.splitter)
            elif isinstance(module, Parallel):
                found.append(module.splitter)
                found.extend(module.preamble)
        return found

    def symbols(self) -> List[str]:
        seen: List[str] = []
        for term in self.terms():
            if term.symbol not in seen:
                seen.append(term.symbol)
        return seen

    def orderable_modules(self) -> List[Union[OptOrder, Parallel]]:
        """Modules whose terms may be permuted, in preorder."""
        return [m for m in self.walk() if isinstance(m, (OptOrder, Parallel))]


def walk(seq: ModuleSeq) -> Iterator[Module]:
    for module in seq.modules:
        yield module
        if isinstance(module, Split):
            for branch in module.branches:
                yield from walk(branch)
        elif isinstance(module, Parallel):
            yield from walk(module.body)


def unparse(node: Union[ChainAst, ModuleSeq, Module]) -> str:
    """Format a tree back into chain text."""
    if isinstance(node, ChainAst):
        return unparse(node.root)
    if isinstance(node, ModuleSeq):
        return " . ".join(unparse(m) for m in node.modules)
    if isinstance(node, Term):
        return node.symbol
    if isinstance(node, OptOrder):
        return "(" + ", ".join(t.symbol for t in node.terms) + ")"
    if isinstance(node, Split):
        branches = ", ".join(unparse(b) for b in node.branches)
        return f"{node.splitter.symbol} [{branches}]"
    if isinstance(node, Parallel):
        preamble = ", ".join(t.symbol for t in node.preamble)
        return f"{node.splitter.symbol} {{{preamble}; {unparse(node.body)}; {node.count}}}"
    raise TypeError(f"not a chain node: {node!r}")


def format_tree(ast: ChainAst) -> str:
    """Indented, one module per line rendering for terminals."""
    lines: List[str] = []

    def emit(seq: ModuleSeq, depth: int) -> None:
        pad = "  " * depth
        lines.append(f"{pad}Seq")
        for module in seq.modules:
            inner = "  " * (depth + 1)
            if isinstance(module, Term):
                lines.append(f"{inner}Term {module.symbol}")
            elif isinstance(module, OptOrder):
                lines.append(f"{inner}OptOrder {', '.join(t.symbol for t in module.terms)}")
            elif isinstance(module, Split):
                lines.append(f"{inner}Split {module.splitter.symbol}")
                for branch in module.branches:
                    emit(branch, depth + 2)
            else:
                preamble = ", ".join(t.symbol for t in module.preamble)
                lines.append(
                    f"{inner}Parallel {module.splitter.symbol} preamble=[{preamble}] count={module.count}"
                )
                emit(module.body, depth + 2)

    emit(ast.root, 0)
    return "\n".join(lines)
