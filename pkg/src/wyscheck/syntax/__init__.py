"""Lexer, parser, pretty printer and resolver for ``.wys`` source."""
from pathlib import Path

from .ast import SourceFile, Span
from .lexer import LexError, SyntaxFault, Token, tokenize
from .parser import ParseError, parse, parse_expr_text, parse_type_text
from .pretty import format_decl, format_expr, format_type, pretty
from .resolve import Program, ResolveError, resolve


def load(path) -> Program:
    """Read, parse and resolve a source file."""
    text = Path(path).read_text(encoding="utf-8")
    return resolve(parse(text, str(path)))


def compile_text(text: str, path: str = "<input>") -> Program:
    return resolve(parse(text, path))


__all__ = [
    "LexError", "ParseError", "Program", "ResolveError", "SourceFile", "Span", "SyntaxFault",
    "Token", "compile_text", "format_decl", "format_expr", "format_type", "load", "parse",
    "parse_expr_text", "parse_type_text", "pretty", "resolve", "tokenize",
]
