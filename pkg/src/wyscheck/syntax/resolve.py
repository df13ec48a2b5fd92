"""Name resolution and recursive-type analysis."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple

from . import ast as A
from .lexer import SyntaxFault


class ResolveError(SyntaxFault):
    pass


@dataclass
class Program:
    """A resolved program.

    ``functions`` maps a name to its overloads in declaration order;
    ``components`` maps every recursive type name to the id of its
    strongly connected component.
    """

    source: A.SourceFile
    decls: Tuple[A.Decl, ...]
    types: Dict[str, A.TypeDecl]
    functions: Dict[str, Tuple[A.FunctionDecl, ...]]
    components: Dict[str, int] = field(default_factory=dict)

    @property
    def callables(self) -> List[A.FunctionDecl]:
        return [d for d in self.decls if isinstance(d, A.FunctionDecl)]

    @property
    def sources(self) -> Dict[str, str]:
        return {self.source.path: self.source.text}

    def is_recursive(self, name: str) -> bool:
        return name in self.components


def named_refs(t: A.TypeExpr) -> Iterator[A.NamedType]:
    """Every NamedType occurring in ``t``."""
    if isinstance(t, A.NamedType):
        yield t
    elif isinstance(t, A.ArrayType):
        yield from named_refs(t.elem)
    elif isinstance(t, A.RefType):
        yield from named_refs(t.referent)
    elif isinstance(t, A.RecordType):
        for _, ft in t.fields:
            yield from named_refs(ft)
    elif isinstance(t, A.UnionType):
        for m in t.members:
            yield from named_refs(m)
    elif isinstance(t, A.LambdaType):
        for p in t.params + t.returns:
            yield from named_refs(p)


def _strongly_connected(graph: Dict[str, List[str]]) -> List[List[str]]:
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    stack: List[str] = []
    on_stack: Set[str] = set()
    out: List[List[str]] = []
    counter = [0]

    def visit(v: str) -> None:
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in graph.get(v, ()):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(sorted(comp))

    for v in sorted(graph):
        if v not in index:
            visit(v)
    return out


class _Resolver:
    def __init__(self, source: A.SourceFile):
        self.source = source
        self.types: Dict[str, A.TypeDecl] = {}
        self.functions: Dict[str, List[A.FunctionDecl]] = {}

    def error(self, message: str, span: Optional[A.Span]) -> ResolveError:
        line = self.source.line(span.line) if span else ""
        return ResolveError(message, span, line)

    def run(self) -> Program:
        for d in self.source.decls:
            if isinstance(d, A.TypeDecl):
                if d.name in self.types:
                    raise self.error(f"duplicate type {d.name!r}", d.span)
                self.types[d.name] = d
        for d in self.source.decls:
            if isinstance(d, A.FunctionDecl):
                overloads = self.functions.setdefault(d.name, [])
                ptypes = tuple(p.type for p in d.params)
                for other in overloads:
                    if tuple(p.type for p in other.params) == ptypes:
                        raise self.error(f"duplicate declaration of {d.name!r}", d.span)
                overloads.append(d)
        for d in self.source.decls:
            if isinstance(d, A.TypeDecl):
                self.check_type(d.type)
                scope = {d.binder} if d.binder else set()
                if d.binder is None:
                    scope |= self._record_fields(d.type)
                for w in d.wheres:
                    self.check_expr(w, scope)
            else:
                self.check_callable(d)
        components = self.analyse_recursion()
        return Program(
            self.source,
            self.source.decls,
            dict(self.types),
            {k: tuple(v) for k, v in self.functions.items()},
            components,
        )

    def _record_fields(self, t: A.TypeExpr, seen: frozenset = frozenset()) -> Set[str]:
        if isinstance(t, A.RecordType):
            return set(t.field_names())
        if isinstance(t, A.NamedType) and t.name in self.types and t.name not in seen:
            return self._record_fields(self.types[t.name].type, seen | {t.name})
        return set()

    # -- types --------------------------------------------------------------

    def check_type(self, t: A.TypeExpr) -> None:
        for ref in named_refs(t):
            if ref.name not in self.types:
                raise self.error(f"unknown type {ref.name!r}", ref.span)

    def analyse_recursion(self) -> Dict[str, int]:
        graph = {
            name: sorted({r.name for r in named_refs(d.type)}) for name, d in self.types.items()
        }
        components: Dict[str, int] = {}
        for cid, comp in enumerate(_strongly_connected(graph)):
            if len(comp) > 1 or comp[0] in graph[comp[0]]:
                for name in comp:
                    components[name] = cid
        # least fixpoint: which recursive types have a finite inhabitant
        inhabited = {name: False for name in components}
        changed = True
        while changed:
            changed = False
            for name in sorted(components):
                if not inhabited[name] and self._inhabited(self.types[name].type, inhabited, set()):
                    inhabited[name] = True
                    changed = True
        for name in sorted(components):
            if not inhabited[name]:
                d = self.types[name]
                raise self.error(
                    f"recursive type {name!r} has no non-recursive case and cannot be inhabited",
                    d.span,
                )
        return components

    def _inhabited(self, t: A.TypeExpr, known: Dict[str, bool], seen: Set[str]) -> bool:
        if isinstance(t, (A.NullType, A.BoolType, A.IntType, A.ArrayType)):
            return True
        if isinstance(t, A.NamedType):
            if t.name in known:
                return known[t.name]
            if t.name in seen:
                return False
            return self._inhabited(self.types[t.name].type, known, seen | {t.name})
        if isinstance(t, A.RefType):
            return self._inhabited(t.referent, known, seen)
        if isinstance(t, A.RecordType):
            return all(self._inhabited(ft, known, seen) for _, ft in t.fields)
        if isinstance(t, A.UnionType):
            return any(self._inhabited(m, known, seen) for m in t.members)
        if isinstance(t, A.LambdaType):
            return all(self._inhabited(r, known, seen) for r in t.returns)
        return False

    # -- bodies -------------------------------------------------------------

    def check_callable(self, d: A.FunctionDecl) -> None:
        for p in d.params + d.returns:
            self.check_type(p.type)
        params = {p.name for p in d.params}
        returns = {r.name for r in d.returns if r.name}
        for r in d.requires:
            self.check_expr(r, params)
        for e in d.ensures:
            self.check_expr(e, params | returns)
        self.check_block(d.body, set(params | returns))

    def check_block(self, stmts: Iterable[A.Stmt], scope: Set[str]) -> None:
        scope = set(scope)
        for s in stmts:
            if isinstance(s, A.VarDecl):
                self.check_type(s.type)
                if s.init is not None:
                    self.check_expr(s.init, scope)
                scope.add(s.name)
            elif isinstance(s, (A.Assign, A.DerefAssign)):
                self.check_expr(s.target, scope)
                self.check_expr(s.value, scope)
            elif isinstance(s, A.Return):
                for v in s.values:
                    self.check_expr(v, scope)
            elif isinstance(s, A.If):
                self.check_expr(s.cond, scope)
                self.check_block(s.then, scope)
                self.check_block(s.orelse, scope)
            elif isinstance(s, A.While):
                self.check_expr(s.cond, scope)
                for inv in s.invariants:
                    self.check_expr(inv, scope)
                self.check_block(s.body, scope)
            elif isinstance(s, A.Assert):
                self.check_expr(s.expr, scope)
            elif isinstance(s, A.ExprStmt):
                self.check_expr(s.expr, scope)

    def check_expr(self, e: A.Expr, scope: Set[str]) -> None:
        if isinstance(e, A.Var):
            if e.name not in scope:
                raise self.error(f"unknown variable {e.name!r}", e.span)
        elif isinstance(e, A.Call):
            if e.name not in scope:
                overloads = self.functions.get(e.name)
                if not overloads:
                    raise self.error(f"unknown function {e.name!r}", e.span)
                if not any(len(d.params) == len(e.args) for d in overloads):
                    raise self.error(
                        f"no declaration of {e.name!r} takes {len(e.args)} argument(s)", e.span
                    )
            for a in e.args:
                self.check_expr(a, scope)
        elif isinstance(e, A.Quantifier):
            self.check_expr(e.range, scope)
            self.check_expr(e.body, scope | {e.var})
        elif isinstance(e, (A.Cast, A.Is)):
            self.check_type(e.type)
            self.check_expr(e.operand, scope)
        else:
            for child in children(e):
                self.check_expr(child, scope)


def children(e: A.Expr) -> Tuple[A.Expr, ...]:
    """Direct sub-expressions of ``e``."""
    if isinstance(e, (A.Unary, A.Length, A.Deref, A.New, A.Cast, A.Is)):
        return (e.operand,)
    if isinstance(e, A.Binary):
        return (e.left, e.right)
    if isinstance(e, A.ArrayLit):
        return e.items
    if isinstance(e, A.ArrayGen):
        return (e.value, e.length)
    if isinstance(e, A.Index):
        return (e.target, e.index)
    if isinstance(e, A.RecordLit):
        return tuple(v for _, v in e.fields)
    if isinstance(e, A.FieldAccess):
        return (e.target,)
    if isinstance(e, A.Range):
        return (e.start, e.end)
    if isinstance(e, A.Quantifier):
        return (e.range, e.body)
    if isinstance(e, A.Call):
        return e.args
    return ()


def resolve(source: A.SourceFile) -> Program:
    """Bind names and classify recursive types; raises :class:`ResolveError`."""
    return _Resolver(source).run()
