"""Abstract syntax for ``.wys`` programs.

All nodes are frozen dataclasses. Spans are excluded from equality and
hashing so two trees parsed from differently formatted text compare equal
when they have the same structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


def _span() -> Optional[Span]:
    return field(default=None, compare=False, repr=False)


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class NullType:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolType:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class IntType:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ArrayType:
    elem: "TypeExpr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordType:
    fields: Tuple[Tuple[str, "TypeExpr"], ...]
    open: bool = False
    span: Optional[Span] = _span()

    def field_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.fields)


@dataclass(frozen=True)
class UnionType:
    members: Tuple["TypeExpr", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class NamedType:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RefType:
    referent: "TypeExpr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LambdaType:
    params: Tuple["TypeExpr", ...]
    returns: Tuple["TypeExpr", ...]
    span: Optional[Span] = _span()


TypeExpr = Union[
    NullType, BoolType, IntType, ArrayType, RecordType, UnionType, NamedType, RefType, LambdaType
]


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class NullLit:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # one of "!", "-"
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()
    # position of the operator token itself (used by mutation sites)
    op_span: Optional[Span] = _span()


@dataclass(frozen=True)
class ArrayLit:
    items: Tuple["Expr", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ArrayGen:
    """``[value; length]``"""

    value: "Expr"
    length: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Length:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Index:
    target: "Expr"
    index: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordLit:
    fields: Tuple[Tuple[str, "Expr"], ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FieldAccess:
    target: "Expr"
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Range:
    start: "Expr"
    end: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Quantifier:
    kind: str  # "all" or "some"
    var: str
    range: Range
    body: "Expr"
    span: Optional[Span] = _span()
    kw_span: Optional[Span] = _span()


@dataclass(frozen=True)
class Call:
    """A call by name; resolves to a declaration or to a lambda-valued variable."""

    name: str
    args: Tuple["Expr", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Deref:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class New:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cast:
    type: TypeExpr
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Is:
    operand: "Expr"
    type: TypeExpr
    span: Optional[Span] = _span()


Expr = Union[
    IntLit, BoolLit, NullLit, Var, Unary, Binary, ArrayLit, ArrayGen, Length, Index,
    RecordLit, FieldAccess, Range, Quantifier, Call, Deref, New, Cast, Is,
]


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    type: TypeExpr
    name: str
    init: Optional[Expr]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Assign:
    target: Expr  # Var, Index or FieldAccess rooted at a Var
    value: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class DerefAssign:
    target: Expr  # the reference expression written through
    value: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Return:
    values: Tuple[Expr, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class While:
    cond: Expr
    invariants: Tuple[Expr, ...]
    body: Tuple["Stmt", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Assert:
    expr: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    span: Optional[Span] = _span()


Stmt = Union[VarDecl, Assign, DerefAssign, Return, If, While, Assert, ExprStmt]


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    type: TypeExpr
    name: Optional[str]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: Tuple[Param, ...]
    returns: Tuple[Param, ...]
    requires: Tuple[Expr, ...]
    ensures: Tuple[Expr, ...]
    body: Tuple[Stmt, ...]
    span: Optional[Span] = _span()

    kind = "function"

    @property
    def signature(self) -> str:
        from .pretty import format_type

        return f"{self.name}({','.join(format_type(p.type) for p in self.params)})"


@dataclass(frozen=True)
class MethodDecl(FunctionDecl):
    kind = "method"


@dataclass(frozen=True)
class TypeDecl:
    name: str
    type: TypeExpr
    binder: Optional[str]
    wheres: Tuple[Expr, ...]
    span: Optional[Span] = _span()


Decl = Union[FunctionDecl, MethodDecl, TypeDecl]


@dataclass(frozen=True)
class SourceFile:
    path: str = field(compare=False)
    decls: Tuple[Decl, ...]
    text: str = field(default="", compare=False, repr=False)
    line_index: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    def line(self, n: int) -> str:
        lines = self.text.split("\n")
        return lines[n - 1] if 0 < n <= len(lines) else ""
