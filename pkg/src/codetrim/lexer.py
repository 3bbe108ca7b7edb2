"""Java lexer producing the flat code-token sequence used downstream.

Comments and whitespace are dropped. String and char literals stay single
tokens, quotes included. Multi-char operators lex greedily so ">>>=" is one
token. Bytes that fit no rule become single-char Operator tokens instead of
failing; the only hard errors are unterminated literals and block comments.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from enum import Enum


class TokenKind(str, Enum):
    IDENTIFIER = "Identifier"
    KEYWORD = "Keyword"
    OPERATOR = "Operator"
    SEPARATOR = "Separator"
    STRING_LITERAL = "StringLiteral"
    CHAR_LITERAL = "CharLiteral"
    NUMBER_LITERAL = "NumberLiteral"
    BOOL_NULL_LITERAL = "BoolNullLiteral"
    ANNOTATION_AT = "AnnotationAt"


class UnterminatedLiteral(ValueError):
    """Unclosed string, char literal, or block comment."""

    def __init__(self, what: str, line: int, col: int):
        super().__init__(f"unterminated {what} at line {line}, col {col}")
        self.what = what
        self.line = line
        self.col = col


class EmptySnippet(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class CodeToken:
    text: str
    kind: TokenKind
    index: int
    line: int
    col: int


@dataclass(frozen=True)
class Snippet:
    id: str
    tokens: tuple[CodeToken, ...]
    source: str


# JLS reserved words. true/false/null are literals, not keywords, and get
# their own kind below.
KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
    """.split()
)

BOOL_NULL = frozenset({"true", "false", "null"})

SEPARATORS = frozenset({"(", ")", "{", "}", "[", "]", ";", ",", ".", "...", "::"})

OPERATORS = frozenset(
    """
    = > < ! ~ ? : -> == >= <= != && || ++ -- + - * / & | ^ %
    << >> >>> += -= *= /= &= |= ^= %= <<= >>= >>>=
    """.split()
)

# Longest alternatives first gives maximal munch for free.
_PUNCT = "|".join(
    re.escape(p) for p in sorted(SEPARATORS | OPERATORS | {"@"}, key=len, reverse=True)
)

_NUMBER = r"""
    0[xX][0-9a-fA-F_]+[lL]?
  | 0[bB][01_]+[lL]?
  | (?:\d[\d_]*\.[\d_]*|\.\d[\d_]*|\d[\d_]*)(?:[eE][+-]?\d[\d_]*)?[fFdDlL]?
"""

# [^\W\d] is any word char that is not a digit: unicode letters plus "_".
_IDENT = r"(?:[^\W\d]|\$)[\w$]*"

_TOKEN_RE = re.compile(
    rf"(?P<number>{_NUMBER})|(?P<ident>{_IDENT})|(?P<punct>{_PUNCT})",
    re.VERBOSE,
)

_WHITESPACE = " \t\r\n\f\v"


def _position(newlines: list[int], offset: int) -> tuple[int, int]:
    """1-based (line, col) of a byte offset given the sorted newline offsets."""
    line = bisect.bisect_left(newlines, offset) + 1
    start = newlines[line - 2] + 1 if line > 1 else 0
    return line, offset - start + 1


def _scan_quoted(source: str, start: int) -> int:
    """End offset (exclusive) of the quoted literal opening at start, or -1."""
    quote = source[start]
    i = start + 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\\":
            i += 2
        elif ch == "\n":
            return -1
        elif ch == quote:
            return i + 1
        else:
            i += 1
    return -1


def _kind_of(match: re.Match) -> TokenKind:
    if match.lastgroup == "number":
        return TokenKind.NUMBER_LITERAL
    if match.lastgroup == "ident":
        text = match.group()
        if text in KEYWORDS:
            return TokenKind.KEYWORD
        if text in BOOL_NULL:
            return TokenKind.BOOL_NULL_LITERAL
        return TokenKind.IDENTIFIER
    text = match.group()
    if text == "@":
        return TokenKind.ANNOTATION_AT
    if text in SEPARATORS:
        return TokenKind.SEPARATOR
    return TokenKind.OPERATOR


def lex(source: str, snippet_id: str = "") -> Snippet:
    """Lex Java source into a Snippet.

    Deterministic; every non-whitespace, non-comment character lands in
    exactly one token. Raises UnterminatedLiteral with the opening position
    when a string, char, or block comment never closes.
    """
    newlines = [m.start() for m in re.finditer("\n", source)]
    tokens: list[CodeToken] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in _WHITESPACE:
            i += 1
            continue
        if ch == "/" and source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        if ch == "/" and source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise UnterminatedLiteral("block comment", *_position(newlines, i))
            i = j + 2
            continue
        if ch == '"' or ch == "'":
            end = _scan_quoted(source, i)
            if end < 0:
                what = "string literal" if ch == '"' else "char literal"
                raise UnterminatedLiteral(what, *_position(newlines, i))
            kind = TokenKind.STRING_LITERAL if ch == '"' else TokenKind.CHAR_LITERAL
            line, col = _position(newlines, i)
            tokens.append(CodeToken(source[i:end], kind, len(tokens), line, col))
            i = end
            continue
        m = _TOKEN_RE.match(source, i)
        line, col = _position(newlines, i)
        if m:
            tokens.append(CodeToken(m.group(), _kind_of(m), len(tokens), line, col))
            i = m.end()
        else:
            # Unknown byte: keep going rather than fail.
            tokens.append(CodeToken(ch, TokenKind.OPERATOR, len(tokens), line, col))
            i += 1
    return Snippet(id=snippet_id, tokens=tuple(tokens), source=source)


def detokenize(snippet: Snippet) -> str:
    """Single-space join of token texts; re-lexing it reproduces (text, kind)."""
    if not snippet.tokens:
        raise EmptySnippet(f"snippet {snippet.id!r} has no tokens")
    return " ".join(t.text for t in snippet.tokens)
