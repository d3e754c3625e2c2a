"""Chaining-request language: lexer, module tree and parser."""
from src.chain.ast import ChainAst, ModuleSeq, OptOrder, Parallel, Split, Term, format_tree, unparse
from src.chain.parser import check_symbols, parse, parse_chain
from src.chain.tokens import Token, TokenKind, tokenize

__all__ = [
    "ChainAst",
    "ModuleSeq",
    "OptOrder",
    "Parallel",
    "Split",
    "Term",
    "Token",
    "TokenKind",
    "check_symbols",
    "format_tree",
    "parse",
    "parse_chain",
    "tokenize",
    "unparse",
]
