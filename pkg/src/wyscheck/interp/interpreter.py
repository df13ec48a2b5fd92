"""Tree-walking evaluator with contract checking."""
from __future__ import annotations

import sys
import threading
import time
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

from ..syntax import ast as A
from ..syntax.pretty import format_type
from ..syntax.resolve import Program, named_refs
from .faults import Fault, FaultKind, Frame
from .values import (
    FALSE, TRUE, Array, Bool, Heap, LambdaValue, Record, Ref, as_bool, format_value,
)

DEFAULT_MAX_DEPTH = 512

_STACK_BYTES = 512 * 1024 * 1024
_RECURSION_LIMIT = 200_000
_deep = threading.local()


def run_deep(fn, *args, **kwargs):
    """Run ``fn`` on a thread with a large C stack so deep interpretation cannot crash.

    Calls made while already on such a thread run inline.
    """
    if getattr(_deep, "active", False):
        return fn(*args, **kwargs)
    box: Dict[str, object] = {}

    def target():
        _deep.active = True
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:  # re-raised on the calling thread
            box["error"] = exc

    if sys.getrecursionlimit() < _RECURSION_LIMIT:
        sys.setrecursionlimit(_RECURSION_LIMIT)
    old = threading.stack_size(_STACK_BYTES)
    try:
        worker = threading.Thread(target=target, name="wyscheck-eval")
        worker.start()
    finally:
        threading.stack_size(old)
    worker.join()
    if "error" in box:
        raise box["error"]
    return box["value"]


@dataclass
class Budget:
    """Wall-clock deadline (``time.monotonic`` seconds) and call-depth cap."""

    deadline: Optional[float] = None
    max_depth: int = DEFAULT_MAX_DEPTH

    @classmethod
    def seconds(cls, timeout: Optional[float], max_depth: int = DEFAULT_MAX_DEPTH) -> "Budget":
        deadline = None if timeout is None else time.monotonic() + timeout
        return cls(deadline, max_depth)


@dataclass
class Returned:
    values: Tuple
    heap: Heap


class _Frame:
    __slots__ = ("env", "types", "pure", "decl")

    def __init__(self, env, types, pure, decl=None):
        self.env = env
        self.types = types
        self.pure = pure
        self.decl = decl


_MISSING = object()


def _int(v, span, what="integer") -> int:
    if type(v) is not int:
        raise Fault(FaultKind.RuntimeTypeError, f"expected {what}, found {format_value(v)}", span)
    return v


def _bool(v, span) -> bool:
    if not isinstance(v, Bool):
        raise Fault(FaultKind.RuntimeTypeError, f"expected bool, found {format_value(v)}", span)
    return v.value


def truncating_divmod(a: int, b: int) -> Tuple[int, int]:
    """Quotient rounded toward zero, and the matching remainder."""
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q, a - b * q


class Interpreter:
    """Evaluates a resolved program.

    One instance runs one evaluation at a time. ``invariant_cache`` may be
    shared between instances; it remembers named-type invariant results for
    heap-independent values.
    """

    CACHE_LIMIT = 500_000

    def __init__(self, program: Program, invariant_cache: Optional[dict] = None):
        self.program = program
        self.cache = invariant_cache if invariant_cache is not None else {}
        self._ref_free: Dict[str, bool] = {}
        self.heap = Heap()
        self.budget = Budget()
        self.depth = 0
        self.steps = 0
        self._ev = {
            A.IntLit: self._ev_int, A.BoolLit: self._ev_bool, A.NullLit: self._ev_null,
            A.Var: self._ev_var, A.Unary: self._ev_unary, A.Binary: self._ev_binary,
            A.ArrayLit: self._ev_array, A.ArrayGen: self._ev_array_gen, A.Length: self._ev_length,
            A.Index: self._ev_index, A.RecordLit: self._ev_record, A.FieldAccess: self._ev_field,
            A.Range: self._ev_range, A.Quantifier: self._ev_quantifier, A.Call: self._ev_call,
            A.Deref: self._ev_deref, A.New: self._ev_new, A.Cast: self._ev_cast, A.Is: self._ev_is,
        }

    # -- public entry points --------------------------------------------------

    def _start(self, heap: Optional[Heap], budget: Optional[Budget]) -> None:
        self.heap = heap if heap is not None else Heap()
        self.budget = budget or Budget()
        self.depth = 0
        self.steps = 0

    def lookup(self, name: str, args: Optional[Sequence] = None) -> A.FunctionDecl:
        """The declaration named ``name``; with ``args``, the overload that accepts them."""
        overloads = self.program.functions.get(name, ())
        if args is not None:
            overloads = tuple(d for d in overloads if len(d.params) == len(args))
            if len(overloads) > 1:
                fits = [d for d in overloads
                        if all(self.conforms(a, p.type) for p, a in zip(d.params, args))]
                overloads = tuple(fits) or overloads
        if not overloads:
            raise KeyError(name)
        return overloads[0]

    def call(
        self,
        decl: Union[A.FunctionDecl, str],
        args: Sequence,
        heap: Optional[Heap] = None,
        budget: Optional[Budget] = None,
        check_entry: bool = True,
    ) -> Returned:
        """Execute ``decl`` on ``args``; raises :class:`Fault` on any violation.

        With ``check_entry`` the declared parameter types and the requires
        clauses are checked first (an unsatisfied clause is a
        PreconditionViolation).
        """
        if isinstance(decl, str):
            decl = self.lookup(decl, args)
        if len(args) != len(decl.params):
            raise ValueError(f"{decl.name} expects {len(decl.params)} arguments, got {len(args)}")

        def go():
            self._start(heap, budget)
            values = self._invoke(decl, tuple(args), None, check_entry=check_entry)
            return Returned(values, self.heap)

        return run_deep(go)

    def admit(self, decl: A.FunctionDecl, args: Sequence, heap: Optional[Heap] = None,
              budget: Optional[Budget] = None) -> bool:
        """True when ``args`` conform to the declared parameter types and satisfy requires.

        Faults raised while deciding propagate with ``decl``'s frame on the trace,
        exactly as :meth:`call` would report them.
        """
        args = tuple(args)

        def go():
            self._start(heap, budget)
            self.depth += 1
            try:
                fr = self._frame_for(decl, args)
                return self._entry_problem(decl, args, fr) is None
            except Fault as f:
                f.trace.append(Frame(decl.name, args))
                raise
            except RecursionError:
                raise self._overflow(decl, None)
            finally:
                self.depth -= 1

        return run_deep(go)

    def eval(self, expr: A.Expr, env: Dict, heap: Optional[Heap] = None,
             budget: Optional[Budget] = None):
        def go():
            self._start(heap, budget)
            return self._eval(expr, _Frame(dict(env), {}, True))

        return run_deep(go)

    def check_clauses(self, clauses: Sequence[A.Expr], env: Dict, heap: Optional[Heap] = None,
                      budget: Optional[Budget] = None) -> Optional[int]:
        """Index of the first clause evaluating to false, or None when all hold.

        A fault during evaluation propagates; it is never read as "false".
        """
        def go():
            self._start(heap, budget)
            return self._check_clauses(clauses, _Frame(dict(env), {}, True))

        return run_deep(go)

    def conforms(self, value, t: A.TypeExpr, heap: Optional[Heap] = None,
                 budget: Optional[Budget] = None) -> bool:
        def go():
            self._start(heap, budget)
            return self._conforms(value, t)

        return run_deep(go)

    # -- invocation ---------------------------------------------------------

    def _frame_for(self, decl: A.FunctionDecl, args: Tuple) -> _Frame:
        env = {p.name: a for p, a in zip(decl.params, args)}
        types = {p.name: p.type for p in decl.params}
        for r in decl.returns:
            if r.name:
                types[r.name] = r.type
        return _Frame(env, types, not isinstance(decl, A.MethodDecl), decl)

    def _entry_problem(self, decl, args, fr) -> Optional[Tuple[str, object]]:
        for p, a in zip(decl.params, args):
            if not self._conforms(a, p.type):
                return ("type", p)
        idx = self._check_clauses(decl.requires, fr)
        if idx is not None:
            return ("requires", idx)
        return None

    def _overflow(self, decl, site) -> Fault:
        return Fault(FaultKind.StackOverflow, "stack overflow", site or decl.span)

    def _invoke(self, decl: A.FunctionDecl, args: Tuple, site: Optional[A.Span],
                check_entry: bool = True) -> Tuple:
        self.depth += 1
        try:
            if self.depth > self.budget.max_depth:
                raise self._overflow(decl, site)
            self._tick(site or decl.span)
            fr = self._frame_for(decl, args)
            if check_entry:
                problem = self._entry_problem(decl, args, fr)
                if problem is not None:
                    what, detail = problem
                    if what == "type":
                        p = detail
                        kind = (FaultKind.TypeInvariantViolation
                                if self._conforms(args[decl.params.index(p)], p.type, structural=True)
                                else FaultKind.RuntimeTypeError)
                        raise Fault(kind, f"argument {p.name} is not a valid {format_type(p.type)}",
                                    site or p.span)
                    clause = decl.requires[detail]
                    raise Fault(FaultKind.PreconditionViolation, "precondition not satisfied",
                                site or clause.span)
            entry_env = dict(fr.env)
            result = self._exec_block(decl.body, fr)
            if result is None:
                if decl.returns:
                    raise Fault(FaultKind.RuntimeTypeError, "missing return statement", decl.span)
                result = ()
            if decl.ensures:
                env = entry_env
                for r, v in zip(decl.returns, result):
                    if r.name:
                        env[r.name] = v
                post = _Frame(env, fr.types, True, decl)
                idx = self._check_clauses(decl.ensures, post)
                if idx is not None:
                    raise Fault(FaultKind.PostconditionViolation, "postcondition not satisfied",
                                decl.ensures[idx].span)
            return result
        except Fault as f:
            f.trace.append(Frame(decl.name, args))
            raise
        except RecursionError:
            f = self._overflow(decl, site)
            f.trace.append(Frame(decl.name, args))
            raise f
        finally:
            self.depth -= 1

    def _tick(self, span) -> None:
        self.steps += 1
        if self.steps & 255 == 0:
            deadline = self.budget.deadline
            if deadline is not None and time.monotonic() > deadline:
                raise Fault(FaultKind.Timeout, "timeout", span)

    # -- statements ---------------------------------------------------------

    def _exec_block(self, stmts: Iterable[A.Stmt], fr: _Frame) -> Optional[Tuple]:
        for s in stmts:
            cls = s.__class__
            if cls is A.VarDecl:
                fr.types[s.name] = s.type
                if s.init is not None:
                    v = self._eval(s.init, fr)
                    self._flow(v, s.type, s.init.span)
                    fr.env[s.name] = v
                else:
                    fr.env.pop(s.name, None)
            elif cls is A.Assign:
                self._assign(s.target, self._eval(s.value, fr), fr, s.span)
            elif cls is A.Return:
                return self._return(s, fr)
            elif cls is A.If:
                branch = s.then if _bool(self._eval(s.cond, fr), s.cond.span) else s.orelse
                r = self._exec_block(branch, fr)
                if r is not None:
                    return r
            elif cls is A.While:
                r = self._while(s, fr)
                if r is not None:
                    return r
            elif cls is A.ExprStmt:
                self._eval(s.expr, fr)
            elif cls is A.DerefAssign:
                ref = self._eval(s.target, fr)
                value = self._eval(s.value, fr)
                if not isinstance(ref, Ref):
                    raise Fault(FaultKind.RuntimeTypeError,
                                f"expected reference, found {format_value(ref)}", s.target.span)
                if fr.pure:
                    raise Fault(FaultKind.RuntimeTypeError, "a function may not write to the heap", s.span)
                try:
                    self.heap.store(ref, value)
                except KeyError:
                    raise Fault(FaultKind.RuntimeTypeError, "dangling reference", s.target.span) from None
            elif cls is A.Assert:
                if not _bool(self._eval(s.expr, fr), s.expr.span):
                    raise Fault(FaultKind.AssertionFailure, "assertion failed", s.expr.span)
            else:
                raise TypeError(f"unknown statement {s!r}")
        return None

    def _return(self, s: A.Return, fr: _Frame) -> Tuple:
        values = tuple(self._eval(v, fr) for v in s.values)
        if len(values) == 1 and isinstance(values[0], tuple):
            values = values[0]
        decl = fr.decl
        if decl is not None:
            if len(values) != len(decl.returns):
                raise Fault(FaultKind.RuntimeTypeError,
                            f"expected {len(decl.returns)} return value(s), found {len(values)}", s.span)
            for r, v, e in zip(decl.returns, values, s.values or (None,) * len(values)):
                self._flow(v, r.type, e.span if e is not None else s.span)
        return values

    def _while(self, s: A.While, fr: _Frame) -> Optional[Tuple]:
        if s.invariants:
            idx = self._check_clauses(s.invariants, fr)
            if idx is not None:
                raise Fault(FaultKind.LoopInvariantViolation, "loop invariant not satisfied on entry",
                            s.invariants[idx].span)
        while True:
            self._tick(s.span)
            if not _bool(self._eval(s.cond, fr), s.cond.span):
                return None
            r = self._exec_block(s.body, fr)
            if r is not None:
                return r
            if s.invariants:
                idx = self._check_clauses(s.invariants, fr)
                if idx is not None:
                    raise Fault(FaultKind.LoopInvariantViolation, "loop invariant not restored",
                                s.invariants[idx].span)

    def _assign(self, target: A.Expr, value, fr: _Frame, span) -> None:
        cls = target.__class__
        if cls is A.Var:
            declared = fr.types.get(target.name)
            if declared is not None:
                self._flow(value, declared, span)
            fr.env[target.name] = value
        elif cls is A.Index:
            arr = self._eval(target.target, fr)
            if not isinstance(arr, Array):
                raise Fault(FaultKind.RuntimeTypeError,
                            f"expected array, found {format_value(arr)}", target.target.span)
            i = _int(self._eval(target.index, fr), target.index.span)
            if not 0 <= i < len(arr.items):
                raise Fault(FaultKind.IndexOutOfBounds,
                            f"index out of bounds (index {i}, length {len(arr.items)})", target.span)
            items = list(arr.items)
            items[i] = value
            self._assign(target.target, Array(tuple(items)), fr, span)
        elif cls is A.FieldAccess:
            rec = self._eval(target.target, fr)
            if not isinstance(rec, Record) or not rec.has(target.name):
                raise Fault(FaultKind.RuntimeTypeError,
                            f"no field {target.name} in {format_value(rec)}", target.span)
            self._assign(target.target, rec.replace(target.name, value), fr, span)
        else:
            raise Fault(FaultKind.RuntimeTypeError, "invalid assignment target", target.span)

    def _flow(self, value, t: A.TypeExpr, span) -> None:
        """A value flowing into a declared type must conform to it."""
        if t.__class__ is A.IntType and type(value) is int:
            return
        if self._conforms(value, t):
            return
        if self._conforms(value, t, structural=True):
            raise Fault(FaultKind.TypeInvariantViolation,
                        f"type invariant not satisfied: {format_value(value)} is not a valid {format_type(t)}",
                        span)
        raise Fault(FaultKind.RuntimeTypeError,
                    f"expected {format_type(t)}, found {format_value(value)}", span)

    # -- specifications -----------------------------------------------------

    def _check_clauses(self, clauses: Sequence[A.Expr], fr: _Frame) -> Optional[int]:
        for i, c in enumerate(clauses):
            if not _bool(self._eval(c, fr), c.span):
                return i
        return None

    def _type_ref_free(self, name: str) -> bool:
        known = self._ref_free.get(name)
        if known is None:
            known = True
            pending, seen = [name], set()
            while pending:
                n = pending.pop()
                if n in seen:
                    continue
                seen.add(n)
                d = self.program.types[n]
                if _mentions_ref_or_lambda(d.type):
                    known = False
                    break
                pending.extend(r.name for r in named_refs(d.type))
            self._ref_free[name] = known
        return known

    def _conforms(self, v, t: A.TypeExpr, structural: bool = False, seen: frozenset = frozenset()) -> bool:
        cls = t.__class__
        if cls is A.IntType:
            return type(v) is int
        if cls is A.BoolType:
            return isinstance(v, Bool)
        if cls is A.NullType:
            return v is None
        if cls is A.ArrayType:
            return isinstance(v, Array) and all(self._conforms(x, t.elem, structural, seen) for x in v.items)
        if cls is A.RecordType:
            if not isinstance(v, Record):
                return False
            if t.open:
                if not all(v.has(n) for n, _ in t.fields):
                    return False
            elif len(v.fields) != len(t.fields) or not all(v.has(n) for n, _ in t.fields):
                return False
            return all(self._conforms(v.get(n), ft, structural, seen) for n, ft in t.fields)
        if cls is A.UnionType:
            return any(self._conforms(v, m, structural, seen) for m in t.members)
        if cls is A.RefType:
            if not isinstance(v, Ref) or v.cell not in self.heap.cells:
                return False
            if v in seen:
                return True
            return self._conforms(self.heap.cells[v.cell], t.referent, structural, seen | {v})
        if cls is A.LambdaType:
            return isinstance(v, LambdaValue) and v.arity == len(t.params)
        if cls is A.NamedType:
            return self._conforms_named(v, t.name, structural, seen)
        raise TypeError(f"unknown type {t!r}")

    def _conforms_named(self, v, name: str, structural: bool, seen: frozenset) -> bool:
        guard = (name, id(v))
        if guard in seen:
            return False
        seen = seen | {guard}
        decl = self.program.types[name]
        if structural or not decl.wheres and not self._has_invariants(name):
            return self._conforms(v, decl.type, structural, seen)
        key = None
        if self._type_ref_free(name):
            key = (name, v)
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        ok = self._conforms(v, decl.type, False, seen)
        if ok and decl.wheres:
            if decl.binder is not None:
                env = {decl.binder: v}
            elif isinstance(v, Record):
                env = dict(v.fields)
            else:
                env = {}
            ok = self._check_clauses(decl.wheres, _Frame(env, {}, True)) is None
        if key is not None:
            if len(self.cache) > self.CACHE_LIMIT:
                self.cache.clear()
            self.cache[key] = ok
        return ok

    def _has_invariants(self, name: str) -> bool:
        cache_key = ("$inv", name)
        known = self._ref_free.get(cache_key)
        if known is None:
            known = False
            pending, seen = [name], set()
            while pending:
                n = pending.pop()
                if n in seen:
                    continue
                seen.add(n)
                d = self.program.types[n]
                if d.wheres:
                    known = True
                    break
                pending.extend(r.name for r in named_refs(d.type))
            self._ref_free[cache_key] = known
        return known

    # -- expressions --------------------------------------------------------

    def _eval(self, e: A.Expr, fr: _Frame):
        return self._ev[e.__class__](e, fr)

    def _ev_int(self, e, fr):
        return e.value

    def _ev_bool(self, e, fr):
        return TRUE if e.value else FALSE

    def _ev_null(self, e, fr):
        return None

    def _ev_var(self, e, fr):
        v = fr.env.get(e.name, _MISSING)
        if v is _MISSING:
            raise Fault(FaultKind.RuntimeTypeError, f"variable {e.name} used before assignment", e.span)
        return v

    def _ev_unary(self, e, fr):
        v = self._eval(e.operand, fr)
        if e.op == "!":
            return FALSE if _bool(v, e.operand.span) else TRUE
        return -_int(v, e.operand.span)

    def _ev_binary(self, e, fr):
        op = e.op
        if op == "&&":
            if not _bool(self._eval(e.left, fr), e.left.span):
                return FALSE
            return as_bool(_bool(self._eval(e.right, fr), e.right.span))
        if op == "||":
            if _bool(self._eval(e.left, fr), e.left.span):
                return TRUE
            return as_bool(_bool(self._eval(e.right, fr), e.right.span))
        if op == "==>":
            if not _bool(self._eval(e.left, fr), e.left.span):
                return TRUE
            return as_bool(_bool(self._eval(e.right, fr), e.right.span))
        left = self._eval(e.left, fr)
        right = self._eval(e.right, fr)
        if op == "==":
            return as_bool(left == right)
        if op == "!=":
            return as_bool(left != right)
        a = _int(left, e.left.span)
        b = _int(right, e.right.span)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "<":
            return as_bool(a < b)
        if op == "<=":
            return as_bool(a <= b)
        if op == ">":
            return as_bool(a > b)
        if op == ">=":
            return as_bool(a >= b)
        if op in ("/", "%"):
            if b == 0:
                raise Fault(FaultKind.DivideByZero, "division by zero", e.span)
            q, r = truncating_divmod(a, b)
            return q if op == "/" else r
        raise Fault(FaultKind.RuntimeTypeError, f"unknown operator {op}", e.span)

    def _ev_array(self, e, fr):
        return Array(tuple(self._eval(x, fr) for x in e.items))

    def _ev_array_gen(self, e, fr):
        v = self._eval(e.value, fr)
        n = _int(self._eval(e.length, fr), e.length.span)
        if n < 0:
            raise Fault(FaultKind.NegativeArrayRange, "negative array length", e.length.span)
        return Array((v,) * n)

    def _ev_length(self, e, fr):
        v = self._eval(e.operand, fr)
        if not isinstance(v, Array):
            raise Fault(FaultKind.RuntimeTypeError, f"expected array, found {format_value(v)}", e.operand.span)
        return len(v.items)

    def _ev_index(self, e, fr):
        arr = self._eval(e.target, fr)
        if not isinstance(arr, Array):
            raise Fault(FaultKind.RuntimeTypeError, f"expected array, found {format_value(arr)}", e.target.span)
        i = _int(self._eval(e.index, fr), e.index.span)
        if not 0 <= i < len(arr.items):
            raise Fault(FaultKind.IndexOutOfBounds,
                        f"index out of bounds (index {i}, length {len(arr.items)})", e.span)
        return arr.items[i]

    def _ev_record(self, e, fr):
        return Record(tuple((n, self._eval(x, fr)) for n, x in e.fields))

    def _ev_field(self, e, fr):
        rec = self._eval(e.target, fr)
        if not isinstance(rec, Record) or not rec.has(e.name):
            raise Fault(FaultKind.RuntimeTypeError, f"no field {e.name} in {format_value(rec)}", e.span)
        return rec.get(e.name)

    def _bounds(self, r: A.Range, fr) -> Tuple[int, int]:
        lo = _int(self._eval(r.start, fr), r.start.span)
        hi = _int(self._eval(r.end, fr), r.end.span)
        if lo > hi:
            raise Fault(FaultKind.NegativeArrayRange, "negative array range", r.span)
        return lo, hi

    def _ev_range(self, e, fr):
        lo, hi = self._bounds(e, fr)
        return Array(tuple(range(lo, hi)))

    def _ev_quantifier(self, e, fr):
        lo, hi = self._bounds(e.range, fr)
        env = fr.env
        saved = env.get(e.var, _MISSING)
        want_all = e.kind == "all"
        result = want_all
        try:
            for i in range(lo, hi):
                self._tick(e.span)
                env[e.var] = i
                if _bool(self._eval(e.body, fr), e.body.span) != want_all:
                    result = not want_all
                    break
        finally:
            if saved is _MISSING:
                env.pop(e.var, None)
            else:
                env[e.var] = saved
        return as_bool(result)

    def _ev_call(self, e, fr):
        if e.name in fr.env:
            return self._apply_lambda(fr.env[e.name], e, fr)
        args = tuple(self._eval(a, fr) for a in e.args)
        decl = self._select(e, args)
        if fr.pure and isinstance(decl, A.MethodDecl):
            raise Fault(FaultKind.RuntimeTypeError, f"a function may not call method {decl.name}", e.span)
        values = self._invoke(decl, args, e.span)
        if len(values) == 1:
            return values[0]
        return values if values else None

    def _select(self, e: A.Call, args: Tuple) -> A.FunctionDecl:
        candidates = [d for d in self.program.functions.get(e.name, ()) if len(d.params) == len(args)]
        if len(candidates) == 1:
            return candidates[0]
        for d in candidates:
            if all(self._conforms(a, p.type, structural=True) for p, a in zip(d.params, args)):
                return d
        raise Fault(FaultKind.RuntimeTypeError, f"no declaration of {e.name} accepts these arguments", e.span)

    def _apply_lambda(self, fn, e, fr):
        if not isinstance(fn, LambdaValue):
            raise Fault(FaultKind.RuntimeTypeError, f"{e.name} is not a function", e.span)
        args = tuple(self._eval(a, fr) for a in e.args)
        self._tick(e.span)
        i = fn.inputs.index_of(args)
        if i is None:
            raise Fault(FaultKind.LambdaDomainExhausted,
                        f"{e.name} applied to {format_value(args)} outside its generated domain", e.span)
        return fn.outputs.at((i + fn.rotation) % fn.outputs.size)

    def _ev_deref(self, e, fr):
        ref = self._eval(e.operand, fr)
        if not isinstance(ref, Ref):
            raise Fault(FaultKind.RuntimeTypeError, f"expected reference, found {format_value(ref)}", e.operand.span)
        try:
            return self.heap.load(ref)
        except KeyError:
            raise Fault(FaultKind.RuntimeTypeError, "dangling reference", e.span) from None

    def _ev_new(self, e, fr):
        return self.heap.alloc(self._eval(e.operand, fr))

    def _ev_cast(self, e, fr):
        v = self._eval(e.operand, fr)
        self._flow(v, e.type, e.span)
        return v

    def _ev_is(self, e, fr):
        return as_bool(self._conforms(self._eval(e.operand, fr), e.type))


def _mentions_ref_or_lambda(t: A.TypeExpr) -> bool:
    if isinstance(t, (A.RefType, A.LambdaType)):
        return True
    if isinstance(t, A.ArrayType):
        return _mentions_ref_or_lambda(t.elem)
    if isinstance(t, A.RecordType):
        return any(_mentions_ref_or_lambda(ft) for _, ft in t.fields)
    if isinstance(t, A.UnionType):
        return any(_mentions_ref_or_lambda(m) for m in t.members)
    return False
