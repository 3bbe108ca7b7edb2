"""Statement splitting and categorization over lexed Java token streams.

split() breaks a snippet at top-level ";", "{", "}" and at annotations, with
special handling for the method signature and for expression braces (array
initializers, lambda bodies, anonymous classes) which stay inside their
statement. categorize() assigns one of 21 categories plus a fallback Other
through a fixed precedence ladder. The ladder is deliberately literal; it is
pinned by the hand-labeled fixture corpus in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from codetrim.lexer import CodeToken, Snippet, TokenKind


class Category(str, Enum):
    ANNOTATION = "Annotation"
    ARITHMETIC = "Arithmetic"
    VARIABLE_DECLARATION = "VariableDeclaration"
    FUNCTION_INVOCATION = "FunctionInvocation"
    RETURN = "Return"
    SWITCH = "Switch"
    BREAK = "Break"
    SETTER = "Setter"
    SYNCHRONIZED = "Synchronized"
    TRY = "Try"
    CATCH = "Catch"
    METHOD_SIGNATURE = "MethodSignature"
    FINALLY = "Finally"
    GETTER = "Getter"
    THROW = "Throw"
    CASE = "Case"
    WHILE = "While"
    CONTINUE = "Continue"
    IF_CONDITION = "IfCondition"
    FOR = "For"
    LOGGING = "Logging"
    OTHER = "Other"


# Canonical row order for per-category reports.
REPORT_ORDER = (
    Category.ANNOTATION,
    Category.ARITHMETIC,
    Category.VARIABLE_DECLARATION,
    Category.FUNCTION_INVOCATION,
    Category.RETURN,
    Category.SWITCH,
    Category.BREAK,
    Category.SETTER,
    Category.SYNCHRONIZED,
    Category.TRY,
    Category.CATCH,
    Category.METHOD_SIGNATURE,
    Category.FINALLY,
    Category.GETTER,
    Category.THROW,
    Category.CASE,
    Category.WHILE,
    Category.CONTINUE,
    Category.IF_CONDITION,
    Category.FOR,
    Category.LOGGING,
)


@dataclass(frozen=True, slots=True)
class Statement:
    start: int
    end: int
    category: Category


@dataclass(frozen=True)
class SplitResult:
    ranges: tuple[tuple[int, int], ...]
    signature_index: int | None
    line_fallback: bool


@dataclass(frozen=True)
class ClassifiedSnippet:
    statements: tuple[Statement, ...]
    line_fallback: bool


_KEYWORD_CATEGORIES = {
    "return": Category.RETURN,
    "throw": Category.THROW,
    "break": Category.BREAK,
    "continue": Category.CONTINUE,
    "switch": Category.SWITCH,
    "case": Category.CASE,
    "default": Category.CASE,
    "while": Category.WHILE,
    "do": Category.WHILE,
    "for": Category.FOR,
    "if": Category.IF_CONDITION,
    "else": Category.IF_CONDITION,
    "try": Category.TRY,
    "catch": Category.CATCH,
    "finally": Category.FINALLY,
    "synchronized": Category.SYNCHRONIZED,
}

_LOG_NAMES = frozenset({"log", "logger", "logging"})
_LOG_LEVELS = frozenset({"info", "warn", "error", "debug", "trace"})

_PRIMITIVES = frozenset(
    {"boolean", "byte", "char", "short", "int", "long", "float", "double"}
)

_ARITHMETIC_OPS = frozenset({"+", "-", "*", "/", "%", "<<", ">>", ">>>", "&", "|", "^"})

# Keywords that can never start a method signature.
_NON_SIGNATURE_LEADS = frozenset(
    """
    if else for while do switch case default try catch finally return throw
    break continue new assert class interface enum import package this super
    """.split()
)

# A "{" right after one of these belongs to an expression (array initializer,
# lambda body), not to block structure.
_EXPR_BRACE_PREV = frozenset({"=", ",", "(", "[", "->", "return"})


def _balanced_braces(tokens: tuple[CodeToken, ...]) -> bool:
    depth = 0
    for t in tokens:
        if t.text == "{":
            depth += 1
        elif t.text == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def _annotation_end(tokens: tuple[CodeToken, ...], i: int) -> int:
    """Exclusive end of the annotation starting at the "@" at index i."""
    n = len(tokens)
    j = i + 1
    if j >= n or tokens[j].kind != TokenKind.IDENTIFIER:
        return j
    j += 1
    while j + 1 < n and tokens[j].text == "." and tokens[j + 1].kind == TokenKind.IDENTIFIER:
        j += 2
    if j < n and tokens[j].text == "(":
        depth = 0
        while j < n:
            if tokens[j].text == "(":
                depth += 1
            elif tokens[j].text == ")":
                depth -= 1
                if depth == 0:
                    return j + 1
            j += 1
    return j


def _signature_end(tokens: tuple[CodeToken, ...], start: int) -> int | None:
    """Exclusive end of a method signature starting at start, or None.

    A signature runs from the snippet start (leading annotations already
    consumed) through the parameter-list ")" and any throws clause, ending
    right before the body "{".
    """
    n = len(tokens)
    if start >= n:
        return None
    first = tokens[start]
    if first.text in ("{", "}", ";", "@"):
        return None
    if first.text == "synchronized":
        if start + 1 < n and tokens[start + 1].text == "(":
            return None
    elif first.kind == TokenKind.KEYWORD and first.text in _NON_SIGNATURE_LEADS:
        return None
    paren = 0
    seen_paren = False
    for j in range(start, n):
        text = tokens[j].text
        if text in ("(", "["):
            paren += 1
            seen_paren = seen_paren or text == "("
        elif text in (")", "]"):
            paren -= 1
        elif paren == 0:
            if text == ";":
                return None
            if text == "{":
                if not seen_paren or j == start:
                    return None
                prev = tokens[j - 1]
                if prev.text in _EXPR_BRACE_PREV:
                    return None
                if prev.text != ")" and prev.kind != TokenKind.IDENTIFIER:
                    return None
                return j
    return None


def _line_ranges(tokens: tuple[CodeToken, ...]) -> list[tuple[int, int]]:
    ranges = []
    start = 0
    for i in range(1, len(tokens)):
        if tokens[i].line != tokens[start].line:
            ranges.append((start, i))
            start = i
    if start < len(tokens):
        ranges.append((start, len(tokens)))
    return ranges


def split(snippet: Snippet) -> SplitResult:
    """Statement ranges of a snippet; every token lands in exactly one range.

    Unbalanced braces degrade to line-oriented splitting, flagged via
    line_fallback.
    """
    tokens = snippet.tokens
    n = len(tokens)
    if n == 0:
        return SplitResult((), None, False)
    if not _balanced_braces(tokens):
        return SplitResult(tuple(_line_ranges(tokens)), None, True)

    ranges: list[tuple[int, int]] = []
    signature_index = None
    i = 0
    while i < n and tokens[i].text == "@":
        j = _annotation_end(tokens, i)
        ranges.append((i, j))
        i = j
    sig_end = _signature_end(tokens, i)
    if sig_end is not None:
        ranges.append((i, sig_end))
        signature_index = len(ranges) - 1
        i = sig_end

    pending = i
    paren = 0
    expr = 0
    while i < n:
        text = tokens[i].text
        if expr > 0:
            if text == "{":
                expr += 1
            elif text == "}":
                expr -= 1
            i += 1
            continue
        if text in ("(", "["):
            paren += 1
        elif text in (")", "]"):
            paren = max(0, paren - 1)
        elif text == "{":
            if paren > 0 or (i > 0 and tokens[i - 1].text in _EXPR_BRACE_PREV):
                expr += 1
            elif i > pending:
                ranges.append((pending, i + 1))
                pending = i + 1
            else:
                ranges.append((i, i + 1))
                pending = i + 1
        elif text == "}":
            if i > pending:
                ranges.append((pending, i))
            ranges.append((i, i + 1))
            pending = i + 1
        elif text == ";" and paren == 0:
            ranges.append((pending, i + 1))
            pending = i + 1
        elif text == "@" and i == pending:
            j = _annotation_end(tokens, i)
            ranges.append((i, j))
            pending = j
            i = j
            continue
        i += 1
    if pending < n:
        ranges.append((pending, n))
    return SplitResult(tuple(ranges), signature_index, False)


def _first_invocation(
    tokens: tuple[CodeToken, ...], start: int, end: int
) -> tuple[str, list[str]] | None:
    """Leftmost method call in the range: (method name, receiver chain)."""
    for j in range(start, end - 1):
        if tokens[j].kind == TokenKind.IDENTIFIER and tokens[j + 1].text == "(":
            receivers = []
            k = j - 1
            while k - 1 >= start and tokens[k].text == "." and (
                tokens[k - 1].kind == TokenKind.IDENTIFIER
                or tokens[k - 1].text in ("this", "super")
            ):
                receivers.append(tokens[k - 1].text)
                k -= 2
            return tokens[j].text, receivers
    return None


def _is_variable_declaration(
    tokens: tuple[CodeToken, ...], start: int, end: int
) -> bool:
    for j in range(start, end - 2):
        t0, t1, t2 = tokens[j], tokens[j + 1], tokens[j + 2]
        if (
            (t0.kind == TokenKind.IDENTIFIER or t0.text in _PRIMITIVES)
            and t1.kind == TokenKind.IDENTIFIER
            and t2.text in ("=", ";")
        ):
            return True
    return False


def categorize(
    snippet: Snippet, range_: tuple[int, int], is_signature: bool = False
) -> Category:
    """Category of one statement range; first matching rule wins."""
    tokens = snippet.tokens
    start, end = range_
    if is_signature:
        return Category.METHOD_SIGNATURE
    first = tokens[start]
    if first.text == "@":
        return Category.ANNOTATION
    if first.kind == TokenKind.KEYWORD and first.text in _KEYWORD_CATEGORIES:
        return _KEYWORD_CATEGORIES[first.text]
    invocation = _first_invocation(tokens, start, end)
    if invocation is not None:
        method, receivers = invocation
        low = method.lower()
        receiver_is_log = any(r.lower() in _LOG_NAMES for r in receivers)
        if low in _LOG_NAMES or receiver_is_log:
            return Category.LOGGING
        if method.startswith("set") and len(method) > 3 and method[3].isupper():
            return Category.SETTER
        if method.startswith("get") and len(method) > 3 and method[3].isupper():
            return Category.GETTER
        if method.startswith("is") and len(method) > 2 and method[2].isupper():
            return Category.GETTER
    if _is_variable_declaration(tokens, start, end):
        return Category.VARIABLE_DECLARATION
    if invocation is not None:
        return Category.FUNCTION_INVOCATION
    if any(tokens[j].text in _ARITHMETIC_OPS for j in range(start, end)):
        return Category.ARITHMETIC
    return Category.OTHER


def classify(snippet: Snippet) -> ClassifiedSnippet:
    """split + categorize in one call."""
    result = split(snippet)
    statements = tuple(
        Statement(s, e, categorize(snippet, (s, e), i == result.signature_index))
        for i, (s, e) in enumerate(result.ranges)
    )
    return ClassifiedSnippet(statements, result.line_fallback)


def token_categories(snippet: Snippet, classified: ClassifiedSnippet | None = None) -> list[Category]:
    """Per-token category, aligned with snippet.tokens."""
    if classified is None:
        classified = classify(snippet)
    out: list[Category] = [Category.OTHER] * len(snippet.tokens)
    for st in classified.statements:
        for i in range(st.start, st.end):
            out[i] = st.category
    return out
