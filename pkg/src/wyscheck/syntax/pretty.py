"""Canonical source rendering of ASTs.

``parse(pretty(tree))`` yields a tree equal to ``tree`` (spans aside).
"""
from __future__ import annotations

from typing import List

from . import ast as A

INDENT = "    "

_PREC = {
    "==>": 1, "||": 2, "&&": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 6, "-": 6, "*": 7, "/": 7, "%": 7,
}
_IS, _RANGE, _UNARY, _POSTFIX, _ATOM = 4, 5, 8, 9, 10


def format_type(t: A.TypeExpr) -> str:
    if isinstance(t, A.NullType):
        return "null"
    if isinstance(t, A.BoolType):
        return "bool"
    if isinstance(t, A.IntType):
        return "int"
    if isinstance(t, A.NamedType):
        return t.name
    if isinstance(t, A.ArrayType):
        return f"{_type_atom(t.elem)}[]"
    if isinstance(t, A.RefType):
        return f"&{_type_atom(t.referent)}"
    if isinstance(t, A.RecordType):
        parts = [f"{format_type(ft)} {name}" for name, ft in t.fields]
        if t.open:
            parts.append("...")
        return "{" + ", ".join(parts) + "}"
    if isinstance(t, A.UnionType):
        return "|".join(_type_atom(m) for m in t.members)
    if isinstance(t, A.LambdaType):
        params = ",".join(format_type(p) for p in t.params)
        rets = ",".join(format_type(r) for r in t.returns)
        return f"function({params})->({rets})"
    raise TypeError(f"not a type: {t!r}")


def _type_atom(t: A.TypeExpr) -> str:
    s = format_type(t)
    if isinstance(t, (A.UnionType, A.LambdaType)):
        return f"({s})"
    return s


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, A.Is):
        return _IS
    if isinstance(e, A.Range):
        return _RANGE
    if isinstance(e, (A.Unary, A.Deref, A.New, A.Cast)):
        return _UNARY
    if isinstance(e, A.IntLit) and e.value < 0:
        return _UNARY
    if isinstance(e, (A.Index, A.FieldAccess)):
        return _POSTFIX
    return _ATOM


def _wrap(e: A.Expr, min_prec: int) -> str:
    s = format_expr(e)
    return f"({s})" if _prec(e) < min_prec else s


def format_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        if e.op == "==>":
            return f"{_wrap(e.left, p + 1)} ==> {_wrap(e.right, p)}"
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, A.Unary):
        if e.op == "-" and isinstance(e.operand, A.IntLit):
            return f"-({format_expr(e.operand)})"
        return f"{e.op}{_wrap(e.operand, _UNARY)}"
    if isinstance(e, A.Deref):
        return f"*{_wrap(e.operand, _UNARY)}"
    if isinstance(e, A.New):
        return f"new {_wrap(e.operand, _UNARY)}"
    if isinstance(e, A.Cast):
        inner = format_expr(e.operand)
        simple = (A.Var, A.Call, A.BoolLit, A.NullLit, A.RecordLit)
        if not (isinstance(e.operand, simple) or (isinstance(e.operand, A.IntLit) and e.operand.value >= 0)):
            inner = f"({inner})"
        return f"({format_type(e.type)}) {inner}"
    if isinstance(e, A.Is):
        return f"{_wrap(e.operand, _IS)} is {_type_atom(e.type)}"
    if isinstance(e, A.Range):
        return f"{_wrap(e.start, _RANGE + 1)}..{_wrap(e.end, _RANGE + 1)}"
    if isinstance(e, A.Length):
        return f"|{format_expr(e.operand)}|"
    if isinstance(e, A.Index):
        return f"{_wrap(e.target, _POSTFIX)}[{format_expr(e.index)}]"
    if isinstance(e, A.FieldAccess):
        return f"{_wrap(e.target, _POSTFIX)}.{e.name}"
    if isinstance(e, A.ArrayLit):
        return "[" + ", ".join(format_expr(i) for i in e.items) + "]"
    if isinstance(e, A.ArrayGen):
        return f"[{format_expr(e.value)}; {format_expr(e.length)}]"
    if isinstance(e, A.RecordLit):
        return "{" + ", ".join(f"{n}: {format_expr(v)}" for n, v in e.fields) + "}"
    if isinstance(e, A.Call):
        return f"{e.name}(" + ", ".join(format_expr(a) for a in e.args) + ")"
    if isinstance(e, A.Quantifier):
        rng = format_expr(e.range)
        return f"{e.kind} {{ {e.var} in {rng} | {format_expr(e.body)} }}"
    raise TypeError(f"not an expression: {e!r}")


def _stmts(stmts, depth: int, out: List[str]) -> None:
    pad = INDENT * depth
    for s in stmts:
        if isinstance(s, A.VarDecl):
            init = f" = {format_expr(s.init)}" if s.init is not None else ""
            out.append(f"{pad}{format_type(s.type)} {s.name}{init}")
        elif isinstance(s, A.Assign):
            out.append(f"{pad}{format_expr(s.target)} = {format_expr(s.value)}")
        elif isinstance(s, A.DerefAssign):
            out.append(f"{pad}*{_wrap(s.target, _UNARY)} = {format_expr(s.value)}")
        elif isinstance(s, A.Return):
            vals = ", ".join(format_expr(v) for v in s.values)
            out.append(f"{pad}return {vals}".rstrip())
        elif isinstance(s, A.Assert):
            out.append(f"{pad}assert {format_expr(s.expr)}")
        elif isinstance(s, A.ExprStmt):
            out.append(f"{pad}{format_expr(s.expr)}")
        elif isinstance(s, A.While):
            inv = "".join(f" where {format_expr(i)}" for i in s.invariants)
            out.append(f"{pad}while {format_expr(s.cond)}{inv}:")
            _stmts(s.body, depth + 1, out)
        elif isinstance(s, A.If):
            _if(s, depth, out, "if")
        else:
            raise TypeError(f"not a statement: {s!r}")


def _if(s: A.If, depth: int, out: List[str], kw: str) -> None:
    pad = INDENT * depth
    out.append(f"{pad}{kw} {format_expr(s.cond)}:")
    _stmts(s.then, depth + 1, out)
    if len(s.orelse) == 1 and isinstance(s.orelse[0], A.If):
        _if(s.orelse[0], depth, out, "else if")
    elif s.orelse:
        out.append(f"{pad}else:")
        _stmts(s.orelse, depth + 1, out)


def _param(p: A.Param) -> str:
    return format_type(p.type) + (f" {p.name}" if p.name else "")


def format_decl(d: A.Decl) -> str:
    if isinstance(d, A.TypeDecl):
        if d.binder is not None:
            head = f"type {d.name} is ({format_type(d.type)} {d.binder})"
        else:
            head = f"type {d.name} is {format_type(d.type)}"
        return "\n".join([head] + [f"where {format_expr(w)}" for w in d.wheres])
    lines = []
    params = ", ".join(_param(p) for p in d.params)
    head = f"{d.kind} {d.name}({params})"
    if d.returns:
        head += " -> (" + ", ".join(_param(r) for r in d.returns) + ")"
    lines.append(head)
    lines += [f"requires {format_expr(r)}" for r in d.requires]
    lines += [f"ensures {format_expr(e)}" for e in d.ensures]
    lines[-1] += ":"
    _stmts(d.body, 1, lines)
    return "\n".join(lines)


def pretty(source: A.SourceFile) -> str:
    return "\n\n".join(format_decl(d) for d in source.decls) + "\n"
