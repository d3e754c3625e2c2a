"""Recursive-descent parser for the chaining-request language.

Grammar, with '.' separating consecutive modules::

    modules  ::= mod ('.' mod)*
    mod      ::= optorder | split | parallel | term
    optorder ::= '(' term (',' term)* ')'
    split    ::= term '[' modules (',' modules)* ']'
    parallel ::= term '{' term (',' term)* ';' modules ';' num '}'
    num      ::= 1 | 2 | ... | n
"""
import logging
from typing import List, Optional, Tuple

from src.chain.ast import ChainAst, ModuleSeq, OptOrder, Parallel, Split, Term
from src.chain.tokens import Token, TokenKind, tokenize
from src.config import get_config
from src.errors import ChainSemanticError, ChainSyntaxError
from src.model.requests import DeploymentRequest

logger = logging.getLogger(__name__)


class _Parser:
    def __init__(self, tokens: List[Token], max_branches: int):
        self.tokens = tokens
        self.index = 0
        self.max_branches = max_branches

    # Token helpers

    def peek(self) -> Optional[Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def peek_kind(self) -> Optional[TokenKind]:
        token = self.peek()
        return token.kind if token else None

    def position(self) -> Tuple[int, int]:
        token = self.peek()
        if token is not None:
            return token.position
        if not self.tokens:
            return (1, 1)
        last = self.tokens[-1]
        return (last.position[0], last.position[1] + len(last.text))

    def fail(self, expected: str) -> ChainSyntaxError:
        token = self.peek()
        found = f"unexpected {token}" if token else "unexpected end of input"
        return ChainSyntaxError(found, self.position(), expected)

    def expect(self, kind: TokenKind, expected: str) -> Token:
        token = self.peek()
        if token is None or token.kind is not kind:
            raise self.fail(expected)
        self.index += 1
        return token

    def accept(self, kind: TokenKind) -> bool:
        if self.peek_kind() is kind:
            self.index += 1
            return True
        return False

    # Productions

    def parse_start(self) -> ChainAst:
        root = self.parse_modules()
        if self.peek() is not None:
            raise self.fail("'.' or end of input")
        return ChainAst(root=root)

    def parse_modules(self) -> ModuleSeq:
        modules = [self.parse_mod()]
        while self.accept(TokenKind.DOT):
            modules.append(self.parse_mod())
        return ModuleSeq(modules=tuple(modules))

    def parse_mod(self):
        if self.peek_kind() is TokenKind.LPAREN:
            return self.parse_optorder()
        term = self.parse_term("<mod>")
        if self.peek_kind() is TokenKind.LBRACKET:
            return self.parse_split(term)
        if self.peek_kind() is TokenKind.LBRACE:
            return self.parse_parallel(term)
        return term

    def parse_term(self, expected: str = "<term>") -> Term:
        token = self.expect(TokenKind.SYMBOL, expected)
        return Term(symbol=token.text, position=token.position)

    def parse_terms(self) -> Tuple[Term, ...]:
        terms = [self.parse_term()]
        while self.accept(TokenKind.COMMA):
            terms.append(self.parse_term())
        return tuple(terms)

    def parse_optorder(self) -> OptOrder:
        self.expect(TokenKind.LPAREN, "'('")
        terms = self.parse_terms()
        self.expect(TokenKind.RPAREN, "',' or ')'")
        return OptOrder(terms=terms)

    def parse_split(self, splitter: Term) -> Split:
        self.expect(TokenKind.LBRACKET, "'['")
        branches = [self.parse_modules()]
        while self.accept(TokenKind.COMMA):
            branches.append(self.parse_modules())
        self.expect(TokenKind.RBRACKET, "'.', ',' or ']'")
        return Split(splitter=splitter, branches=tuple(branches))

    def parse_parallel(self, splitter: Term) -> Parallel:
        self.expect(TokenKind.LBRACE, "'{'")
        preamble = self.parse_terms()
        self.expect(TokenKind.SEMICOLON, "',' or ';'")
        body = self.parse_modules()
        self.expect(TokenKind.SEMICOLON, "'.' or ';'")
        count = self.parse_num()
        self.expect(TokenKind.RBRACE, "'}'")
        return Parallel(splitter=splitter, preamble=preamble, body=body, count=count)

    def parse_num(self) -> int:
        token = self.peek()
        expected = f"<num> in 1..{self.max_branches}"
        if token is None or token.kind is not TokenKind.NUMBER:
            raise self.fail(expected)
        value = int(token.text)
        if not 1 <= value <= self.max_branches:
            raise self.fail(expected)
        self.index += 1
        return value


def check_symbols(ast: ChainAst, request: DeploymentRequest) -> None:
    """Resolve every term against the request and check parallel preambles.

    Raises:
        ChainSemanticError: On an undeclared symbol or a preamble missing its splitter
    """
    declared = request.symbols
    for term in ast.terms():
        if term.symbol not in declared:
            raise ChainSemanticError(
                f"request {request.id}: symbol {term.symbol} is neither a function use nor an endpoint",
                term.position or (1, 1),
            )
    for module in ast.walk():
        if isinstance(module, Parallel):
            symbols = [t.symbol for t in module.preamble]
            if module.splitter.symbol not in symbols:
                raise ChainSemanticError(
                    f"request {request.id}: preamble of parallel module does not contain "
                    f"its splitter {module.splitter.symbol}",
                    module.splitter.position or (1, 1),
                )
            if len(set(symbols)) != len(symbols):
                raise ChainSemanticError(
                    f"request {request.id}: preamble of parallel module repeats a term",
                    module.splitter.position or (1, 1),
                )


def parse(
    tokens: List[Token],
    request: Optional[DeploymentRequest] = None,
    max_branches: Optional[int] = None,
) -> ChainAst:
    """Parse a token list into a module tree.

    Args:
        tokens: Output of tokenize
        request: When given, symbols are resolved against its uses and endpoints
        max_branches: Largest accepted parallel count, defaults to the configured bound

    Returns:
        ChainAst

    Raises:
        ChainSyntaxError: Tokens not derivable from the grammar
        ChainSemanticError: Undeclared symbol (only with a request)
    """
    if max_branches is None:
        max_branches = get_config().max_branches
    ast = _Parser(tokens, max_branches).parse_start()
    if request is not None:
        check_symbols(ast, request)
    return ast


def parse_chain(
    text: str,
    request: Optional[DeploymentRequest] = None,
    max_branches: Optional[int] = None,
) -> ChainAst:
    """Tokenize and parse chain text."""
    ast = parse(tokenize(text), request=request, max_branches=max_branches)
    logger.debug(f"Parsed chain {text!r}: {len(ast.terms())} terms")
    return ast
