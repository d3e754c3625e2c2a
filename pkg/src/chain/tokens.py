"""Lexer for the chaining-request language."""
import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from src.errors import ChainLexError


class TokenKind(str, Enum):
    SYMBOL = "Symbol"
    NUMBER = "Number"
    DOT = "Dot"
    COMMA = "Comma"
    SEMICOLON = "Semicolon"
    LPAREN = "LParen"
    RPAREN = "RParen"
    LBRACKET = "LBracket"
    RBRACKET = "RBracket"
    LBRACE = "LBrace"
    RBRACE = "RBrace"


DELIMITERS = {
    ".": TokenKind.DOT,
    ",": TokenKind.COMMA,
    ";": TokenKind.SEMICOLON,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
}

_TOKEN_RE = re.compile(
    r"(?P<space>[ \t\r\n]+)"
    r"|(?P<symbol>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<number>[0-9]+)"
    r"|(?P<delim>[.,;()\[\]{}])"
)


@dataclass(frozen=True)
class Token:
    """One lexeme with its 1-based (line, column) position."""

    kind: TokenKind
    text: str
    position: Tuple[int, int]

    def __str__(self) -> str:
        return f"{self.kind.value} {self.text!r}"


def tokenize(text: str) -> List[Token]:
    """Split chain text into tokens, skipping whitespace.

    Args:
        text: Chain expression

    Returns:
        Tokens in source order

    Raises:
        ChainLexError: On a character outside the language alphabet
    """
    tokens: List[Token] = []
    offset = 0
    line, line_start = 1, 0
    while offset < len(text):
        match = _TOKEN_RE.match(text, offset)
        position = (line, offset - line_start + 1)
        if match is None:
            raise ChainLexError(f"unexpected character {text[offset]!r}", position)

        lexeme = match.group()
        if match.lastgroup == "space":
            newlines = lexeme.count("\n")
            if newlines:
                line += newlines
                line_start = offset + lexeme.rindex("\n") + 1
        elif match.lastgroup == "symbol":
            tokens.append(Token(TokenKind.SYMBOL, lexeme, position))
        elif match.lastgroup == "number":
            tokens.append(Token(TokenKind.NUMBER, lexeme, position))
        else:
            tokens.append(Token(DELIMITERS[lexeme], lexeme, position))
        offset = match.end()
    return tokens


def end_position(text: str) -> Tuple[int, int]:
    """Position just past the last character, reported for errors at end of input."""
    line = text.count("\n") + 1
    column = len(text) - (text.rfind("\n") + 1) + 1
    return line, column
