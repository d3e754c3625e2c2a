import random

import pytest

from conftest import make_catalog, make_network, make_requests, request_entry
from src.chain import (
    ChainAst,
    OptOrder,
    Parallel,
    Split,
    Term,
    TokenKind,
    format_tree,
    parse_chain,
    tokenize,
    unparse,
)
from src.errors import ChainLexError, ChainSemanticError, ChainSyntaxError


def test_tokenize_positions():
    tokens = tokenize("a1 . (u2,u3)\n. b")
    assert [t.kind for t in tokens] == [
        TokenKind.SYMBOL,
        TokenKind.DOT,
        TokenKind.LPAREN,
        TokenKind.SYMBOL,
        TokenKind.COMMA,
        TokenKind.SYMBOL,
        TokenKind.RPAREN,
        TokenKind.DOT,
        TokenKind.SYMBOL,
    ]
    assert tokens[0].position == (1, 1)
    assert tokens[3].position == (1, 7)
    assert tokens[-1].position == (2, 3)


def test_lex_error_position():
    with pytest.raises(ChainLexError) as info:
        tokenize("a1 . u2 ! a3")
    assert info.value.position == (1, 9)


def test_parse_sequence_of_all_module_kinds():
    ast = parse_chain("a1 . (u1, u2) . u3 [u4 . a2, a3] . u5 {u5, u6; u7; 3} . a4")
    kinds = [type(m) for m in ast.root.modules]
    assert kinds == [Term, OptOrder, Split, Parallel, Term]
    parallel = ast.root.modules[3]
    assert parallel.count == 3
    assert [t.symbol for t in parallel.preamble] == ["u5", "u6"]
    split = ast.root.modules[2]
    assert len(split.branches) == 2
    assert [type(o) for o in ast.orderable_modules()] == [OptOrder, Parallel]


def test_unparse_round_trip():
    text = "a1 . (u1, u2) . u3 [u4 . a2, a3] . u5 {u5, u6; u7 . (u8, u9); 2} . a4"
    ast = parse_chain(text)
    assert unparse(ast) == text
    assert parse_chain(unparse(ast)) == ast


def test_format_tree_indents_nested_modules():
    tree = format_tree(parse_chain("a . s [b, c]"))
    assert tree.splitlines() == ["Seq", "  Term a", "  Split s", "    Seq", "      Term b", "    Seq", "      Term c"]


@pytest.mark.parametrize(
    "text,position,expected",
    [
        ("a . . b", (1, 5), "<mod>"),
        ("a . (b c)", (1, 8), "',' or ')'"),
        ("a b", (1, 3), "'.' or end of input"),
        ("a . u {u; b; 0}", (1, 14), "<num> in 1..64"),
        ("a . u {u; b; 65}", (1, 14), "<num> in 1..64"),
        ("a . u [b", (1, 9), "'.', ',' or ']'"),
        ("", (1, 1), "<mod>"),
    ],
)
def test_syntax_errors(text, position, expected):
    with pytest.raises(ChainSyntaxError) as info:
        parse_chain(text)
    assert info.value.position == position
    assert info.value.expected == expected


def test_max_branches_bound_is_configurable():
    assert parse_chain("a . u {u; b; 4}", max_branches=4).root.modules[1].count == 4
    with pytest.raises(ChainSyntaxError):
        parse_chain("a . u {u; b; 5}", max_branches=4)


@pytest.fixture
def request_u():
    net = make_network({"n1": (2, 2), "n2": (2, 2)}, [("n1", "n2", 10, 1)])
    catalog = make_catalog({"fw": (1, 1, 2, 2)})
    entry = request_entry(
        "r", "a1 . u1 . a2", {"u1": "fw", "u2": "fw"}, {"a1": "n1", "a2": "n2"}, [("a1", "a2")]
    )
    [request] = make_requests([entry], catalog, net)
    return request


def test_undeclared_symbol_is_semantic(request_u):
    with pytest.raises(ChainSemanticError) as info:
        parse_chain("a1 . u1 . dpi . a2", request_u)
    assert info.value.position == (1, 11)
    assert info.value.exit_code == 3


def test_preamble_without_its_splitter_is_semantic(request_u):
    with pytest.raises(ChainSemanticError, match="splitter"):
        parse_chain("a1 . u1 {u2; a2; 2}", request_u)


def test_preamble_with_a_repeated_term_is_semantic(request_u):
    with pytest.raises(ChainSemanticError, match="repeats"):
        parse_chain("a1 . u1 {u1, u1; a2; 2}", request_u)


# Grammar conformance over generated strings


class ChainGenerator:
    """Random derivations of the chain grammar."""

    def __init__(self, rng: random.Random, max_depth: int = 6):
        self.rng = rng
        self.max_depth = max_depth
        self.counter = 0

    def symbol(self) -> str:
        self.counter += 1
        return f"s{self.counter}"

    def modules(self, depth: int) -> str:
        count = self.rng.randint(1, 3 if depth == 1 else 2)
        return " . ".join(self.mod(depth) for _ in range(count))

    def terms(self) -> str:
        return ", ".join(self.symbol() for _ in range(self.rng.randint(1, 3)))

    def mod(self, depth: int) -> str:
        choices = ["term", "optorder"]
        if depth < self.max_depth:
            choices += ["split", "parallel"]
        kind = self.rng.choice(choices)
        if kind == "term":
            return self.symbol()
        if kind == "optorder":
            return f"({self.terms()})"
        if kind == "split":
            branches = ", ".join(self.modules(depth + 1) for _ in range(self.rng.randint(1, 3)))
            return f"{self.symbol()} [{branches}]"
        splitter = self.symbol()
        return f"{splitter} {{{splitter}, {self.terms()}; {self.modules(depth + 1)}; {self.rng.randint(1, 64)}}}"


def mutate(rng: random.Random, text: str) -> str:
    """Inject a delimiter error that no derivation can produce."""
    tokens = [t.text for t in tokenize(text)]
    options = ["double_dot", "trailing_closer", "open_paren"]
    if tokens[-1] in (")", "]", "}"):
        options.append("drop_closer")
    kind = rng.choice(options)
    if kind == "double_dot":
        at = rng.randint(0, len(tokens))
        tokens[at:at] = [".", "."]
    elif kind == "trailing_closer":
        tokens.append(rng.choice([")", "]", "}"]))
    elif kind == "open_paren":
        tokens.insert(0, "(")
    else:
        tokens.pop()
    return " ".join(tokens)


def test_generated_strings_all_parse():
    rng = random.Random(7)
    for _ in range(1000):
        text = ChainGenerator(rng).modules(1)
        ast = parse_chain(text)
        assert isinstance(ast, ChainAst)
        assert parse_chain(unparse(ast)) == ast


def test_mutated_strings_all_rejected():
    rng = random.Random(11)
    for _ in range(1000):
        text = mutate(rng, ChainGenerator(rng).modules(1))
        with pytest.raises(ChainSyntaxError):
            parse_chain(text)
