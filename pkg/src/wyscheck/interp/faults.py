"""Runtime and specification faults, and their stack-trace rendering."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from ..syntax.ast import Span
from .values import format_value, to_json


class FaultKind(enum.Enum):
    DivideByZero = "division by zero"
    IndexOutOfBounds = "index out of bounds"
    NegativeArrayRange = "negative array range"
    TypeInvariantViolation = "type invariant not satisfied"
    AssertionFailure = "assertion failed"
    PreconditionViolation = "precondition not satisfied"
    PostconditionViolation = "postcondition not satisfied"
    LoopInvariantViolation = "loop invariant not satisfied"
    RuntimeTypeError = "runtime type error"
    LambdaDomainExhausted = "lambda applied outside its generated domain"
    StackOverflow = "stack overflow"
    Timeout = "timeout"


@dataclass(frozen=True)
class Frame:
    name: str
    args: Tuple

    def __str__(self) -> str:
        return f"{self.name}({','.join(format_value(a) for a in self.args)})"


class Fault(Exception):
    """Raised by the interpreter; ``trace`` is innermost-first."""

    def __init__(self, kind: FaultKind, message: Optional[str] = None, span: Optional[Span] = None):
        self.kind = kind
        self.message = message or kind.value
        self.span = span
        self.trace: List[Frame] = []
        super().__init__(self.message)

    def __reduce__(self):
        return (_rebuild, (self.kind, self.message, self.span, self.trace))

    def __repr__(self) -> str:
        where = f" at {self.span}" if self.span else ""
        return f"Fault({self.kind.name}: {self.message}{where})"

    def to_dict(self, sources: Optional[Mapping[str, str]] = None) -> Dict:
        out = {
            "kind": self.kind.name,
            "message": self.message,
            "file": self.span.file if self.span else None,
            "line": self.span.line if self.span else None,
            "frames": [
                {"name": f.name, "args": [to_json(a) for a in f.args], "text": str(f)}
                for f in self.trace
            ],
        }
        if sources is not None:
            out["trace"] = format_trace(self, sources)
        return out


def _rebuild(kind, message, span, trace) -> Fault:
    f = Fault(kind, message, span)
    f.trace = list(trace)
    return f


def format_trace(fault: Fault, sources: Mapping[str, str]) -> str:
    """Render ``fault`` as::

        path:line: message
        <source line>
        ^^^^
        Stack Trace:
        --> inner(args)
        --> outer(args)
    """
    lines = []
    span = fault.span
    if span is None:
        lines.append(f"<unknown>: {fault.message}")
    else:
        lines.append(f"{span.file}:{span.line}: {fault.message}")
        text = sources.get(span.file)
        if text is not None:
            src = text.replace("\r\n", "\n").split("\n")
            if 0 < span.line <= len(src):
                source_line = src[span.line - 1]
                lines.append(source_line)
                end = min(span.end_col, len(source_line) + 1)
                lines.append(" " * (span.col - 1) + "^" * max(1, end - span.col))
    if fault.trace:
        lines.append("Stack Trace:")
        lines.extend(f"--> {frame}" for frame in fault.trace)
    return "\n".join(lines)
