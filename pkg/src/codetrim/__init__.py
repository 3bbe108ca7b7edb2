"""Attention-guided token pruning for Java code snippets."""

from codetrim.lexer import CodeToken, Snippet, TokenKind, detokenize, lex

__version__ = "0.1.0"

__all__ = ["CodeToken", "Snippet", "TokenKind", "detokenize", "lex"]
