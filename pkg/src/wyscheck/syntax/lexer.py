"""Indentation-aware tokenizer.

Logical lines are built from physical lines the way Python does it: lines
inside open brackets continue the current logical line, and blank or
comment-only lines are ignored. In addition a physical line whose first word
is ``requires``, ``ensures`` or ``where`` continues the previous logical line,
which is how declaration headers and type invariants are laid out.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .ast import Span

KEYWORDS = frozenset(
    """
    function method type is requires ensures where return if else while assert
    new all some in true false null int bool
    """.split()
)

CONTINUATION_KEYWORDS = frozenset({"requires", "ensures", "where"})

# longest first
OPERATORS = (
    "==>", "...", "..", "==", "!=", "<=", ">=", "&&", "||", "->",
    "<", ">", "+", "-", "*", "/", "%", "!", "=", "|", "&",
    "(", ")", "[", "]", "{", "}", ",", ":", ";", ".",
)

OPENERS = {"(": ")", "[": "]", "{": "}"}
CLOSERS = {")", "]", "}"}


class SyntaxFault(Exception):
    """A lexing, parsing or resolution error tied to a source location."""

    def __init__(self, message: str, span: Span | None = None, source_line: str = ""):
        self.message = message
        self.span = span
        self.source_line = source_line
        super().__init__(self.render())

    def render(self) -> str:
        if self.span is None:
            return self.message
        out = f"{self.span.file}:{self.span.line}:{self.span.col}: {self.message}"
        if self.source_line:
            width = max(1, self.span.end_col - self.span.col)
            out += f"\n{self.source_line}\n{' ' * (self.span.col - 1)}{'^' * width}"
        return out


class LexError(SyntaxFault):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # keyword/operator text, or INT, IDENT, NEWLINE, INDENT, DEDENT, EOF
    text: str
    line: int
    col: int
    end_col: int
    value: object = None

    def __repr__(self) -> str:
        return f"Token({self.kind!r}, {self.text!r}, {self.line}:{self.col})"


def _scan_line(text: str, lineno: int, start: int, path: str) -> List[Token]:
    toks: List[Token] = []
    i = start
    n = len(text)
    while i < n:
        c = text[i]
        if c == " ":
            i += 1
            continue
        if c == "\t":
            i += 1
            continue
        if text.startswith("//", i):
            break
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], lineno, i + 1, j + 1, int(text[i:j])))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            toks.append(Token(kind, word, lineno, i + 1, j + 1))
            i = j
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                toks.append(Token(op, op, lineno, i + 1, i + 1 + len(op)))
                i += len(op)
                break
        else:
            span = Span(path, lineno, i + 1, i + 2)
            raise LexError(f"unexpected character {c!r}", span, text)
    return toks


def tokenize(text: str, path: str = "<input>") -> List[Token]:
    """Turn source text into a token list ending with EOF."""
    out: List[Token] = []
    indents = [0]
    depth = 0  # bracket nesting
    have_line = False
    last_line, last_end = 1, 1
    lines = text.replace("\r\n", "\n").split("\n")

    for lineno, raw in enumerate(lines, start=1):
        if depth > 0:
            toks = _scan_line(raw, lineno, 0, path)
        else:
            stripped = raw.lstrip(" \t")
            if not stripped or stripped.startswith("//"):
                continue
            lead = raw[: len(raw) - len(stripped)]
            if "\t" in lead:
                col = lead.index("\t") + 1
                raise LexError("tab in indentation", Span(path, lineno, col, col + 1), raw)
            width = len(lead)
            toks = _scan_line(raw, lineno, width, path)
            if not toks:
                continue
            continuing = have_line and toks[0].kind in CONTINUATION_KEYWORDS
            if not continuing:
                if have_line:
                    out.append(Token("NEWLINE", "", last_line, last_end, last_end))
                if width > indents[-1]:
                    indents.append(width)
                    out.append(Token("INDENT", "", lineno, 1, width + 1))
                elif width < indents[-1]:
                    while width < indents[-1]:
                        indents.pop()
                        out.append(Token("DEDENT", "", lineno, 1, width + 1))
                    if width != indents[-1]:
                        raise LexError(
                            "dedent does not match any enclosing block",
                            Span(path, lineno, 1, width + 1),
                            raw,
                        )
                have_line = True
        for tok in toks:
            if tok.kind in OPENERS:
                depth += 1
            elif tok.kind in CLOSERS and depth > 0:
                depth -= 1
        out.extend(toks)
        if toks:
            last_line, last_end = toks[-1].line, toks[-1].end_col

    if have_line:
        out.append(Token("NEWLINE", "", last_line, last_end, last_end))
    while len(indents) > 1:
        indents.pop()
        out.append(Token("DEDENT", "", last_line, last_end, last_end))
    out.append(Token("EOF", "", last_line, last_end, last_end))
    return out


def line_starts(text: str) -> Tuple[int, ...]:
    """Byte offsets of the first character of every line."""
    starts = [0]
    for i, ch in enumerate(text.encode("utf-8")):
        if ch == 0x0A:
            starts.append(i + 1)
    return tuple(starts)
