"""Integer-indexed finite domains over types.

Every domain knows its exact ``size`` and can build the value at any index
without enumerating the others. Compound domains are mixed-radix products in
which the first component varies fastest.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .interp.values import FALSE, TRUE, Array, Bool, Heap, LambdaValue, Record, Ref
from .syntax import ast as A
from .syntax.pretty import format_type
from .syntax.resolve import Program

_MEMO_LIMIT = 100_000


class UnsupportedType(Exception):
    """The type cannot be generated (for example a reference nested in an array)."""


@dataclass(frozen=True)
class DomainParams:
    int_min: int = -3
    int_max: int = 3
    max_array_len: int = 3
    max_depth: int = 3
    alias_width: int = 3
    max_rotation: int = 2

    def __post_init__(self):
        if self.int_min > self.int_max:
            raise ValueError(f"int_min ({self.int_min}) exceeds int_max ({self.int_max})")
        for name in ("max_array_len", "max_depth", "alias_width", "max_rotation"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def as_tuple(self) -> Tuple[int, ...]:
        return (self.int_min, self.int_max, self.max_array_len, self.max_depth,
                self.alias_width, self.max_rotation)


class Domain:
    """Base class. Subclasses set ``size`` and implement ``_at`` and ``_index``."""

    size: int = 0
    elem_type: Optional[A.TypeExpr] = None
    underlying: bool = True

    def at(self, i: int):
        if not 0 <= i < self.size:
            raise IndexError(f"index {i} outside domain of size {self.size}")
        return self._at(i)

    def _at(self, i: int):
        raise NotImplementedError

    def index_of(self, value) -> Optional[int]:
        """Inverse of :meth:`at`; None when ``value`` is outside the domain."""
        memo = self.__dict__.setdefault("_memo", {})
        try:
            return memo[value]
        except KeyError:
            pass
        except TypeError:
            return self._index(value)
        i = self._index(value)
        if len(memo) >= _MEMO_LIMIT:
            memo.clear()
        memo[value] = i
        return i

    def _index(self, value) -> Optional[int]:
        raise NotImplementedError

    def __len__(self) -> int:
        # len() is capped at sys.maxsize; prefer .size for huge domains
        return self.size

    def __iter__(self):
        for i in range(self.size):
            yield self._at(i)


class EmptyDomain(Domain):
    size = 0

    def _index(self, value):
        return None


class NullDomain(Domain):
    size = 1

    def _at(self, i):
        return None

    def index_of(self, value):
        return 0 if value is None else None


class BoolDomain(Domain):
    size = 2

    def _at(self, i):
        return TRUE if i else FALSE

    def index_of(self, value):
        if isinstance(value, Bool):
            return 1 if value.value else 0
        return None


class IntDomain(Domain):
    def __init__(self, lo: int, hi: int):
        self.lo, self.hi = lo, hi
        self.size = max(0, hi - lo + 1)

    def _at(self, i):
        return self.lo + i

    def index_of(self, value):
        if type(value) is int and self.lo <= value <= self.hi:
            return value - self.lo
        return None


def _digits(i: int, radices: Sequence[int]) -> List[int]:
    out = []
    for r in radices:
        i, d = divmod(i, r)
        out.append(d)
    return out


def _undigits(digits: Sequence[int], radices: Sequence[int]) -> int:
    i = 0
    for d, r in zip(reversed(digits), reversed(radices)):
        i = i * r + d
    return i


class ProductDomain(Domain):
    """Tuples drawn from ``parts``; the first part varies fastest."""

    def __init__(self, parts: Sequence[Domain]):
        self.parts = tuple(parts)
        size = 1
        for p in self.parts:
            size *= p.size
        self.size = size

    def _at(self, i):
        radices = [p.size for p in self.parts]
        return tuple(p._at(d) for p, d in zip(self.parts, _digits(i, radices)))

    def _index(self, value):
        if not isinstance(value, tuple) or len(value) != len(self.parts):
            return None
        digits = []
        for p, v in zip(self.parts, value):
            d = p.index_of(v)
            if d is None:
                return None
            digits.append(d)
        return _undigits(digits, [p.size for p in self.parts])


class ArrayDomain(Domain):
    """Arrays of length 0..max_len, ordered by length then mixed-radix over elements."""

    def __init__(self, elem: Domain, max_len: int):
        self.elem = elem
        self.max_len = max_len
        n = elem.size
        self.blocks = [n ** length for length in range(max_len + 1)]
        self.size = sum(self.blocks)

    def _at(self, i):
        for length, block in enumerate(self.blocks):
            if i < block:
                radices = [self.elem.size] * length
                return Array(tuple(self.elem._at(d) for d in _digits(i, radices)))
            i -= block
        raise IndexError(i)

    def _index(self, value):
        if not isinstance(value, Array) or len(value.items) > self.max_len:
            return None
        digits = []
        for v in value.items:
            d = self.elem.index_of(v)
            if d is None:
                return None
            digits.append(d)
        length = len(value.items)
        return sum(self.blocks[:length]) + _undigits(digits, [self.elem.size] * length)


class RecordDomain(Domain):
    """Records over the listed fields; the first declared field varies fastest."""

    def __init__(self, names: Sequence[str], fields: Sequence[Domain]):
        self.names = tuple(names)
        self.product = ProductDomain(fields)
        self.size = self.product.size

    def _at(self, i):
        return Record(tuple(zip(self.names, self.product._at(i))))

    def _index(self, value):
        if not isinstance(value, Record) or len(value.fields) != len(self.names):
            return None
        if not all(value.has(n) for n in self.names):
            return None
        return self.product.index_of(tuple(value.get(n) for n in self.names))


class UnionDomain(Domain):
    """Concatenation of member domains in declared order (no deduplication)."""

    def __init__(self, members: Sequence[Domain]):
        self.members = tuple(members)
        self.size = sum(m.size for m in self.members)

    def _at(self, i):
        for m in self.members:
            if i < m.size:
                return m._at(i)
            i -= m.size
        raise IndexError(i)

    def _index(self, value):
        offset = 0
        for m in self.members:
            d = m.index_of(value)
            if d is not None:
                return offset + d
            offset += m.size
        return None


class RefDomain(Domain):
    """A lone reference parameter: one fresh cell holding each referent value.

    ``at`` returns the cell contents; :meth:`decode` materialises the cell.
    """

    def __init__(self, referent: Domain):
        self.referent = referent
        self.size = referent.size

    def _at(self, i):
        return self.referent._at(i)

    def decode(self, i) -> Tuple[Ref, Heap]:
        heap = Heap()
        return heap.alloc(self.at(i)), heap

    def _index(self, value):
        return self.referent.index_of(value)


class LambdaDomain(Domain):
    """Generated functions; rotation ``k`` maps input index i to output index (i+k) mod |out|."""

    def __init__(self, t: A.LambdaType, inputs: ProductDomain, outputs: Domain, max_rotation: int):
        self.type = t
        self.signature = format_type(t)
        self.inputs = inputs
        self.outputs = outputs
        self.size = min(max_rotation + 1, outputs.size)

    def _at(self, i):
        return LambdaValue(self.signature, i, self.inputs, self.outputs, len(self.type.params))

    def _index(self, value):
        if isinstance(value, LambdaValue) and value.signature == self.signature and value.rotation < self.size:
            return value.rotation
        return None


class AliasGroupDomain(Domain):
    """Heap shapes for ``m`` reference parameters sharing one referent type.

    Block ``k`` (k = 1..K, K = min(m, max(1, width))) uses k cells with
    parameter ``p_i`` pointing at cell ``min(i, k)``; cell contents are
    mixed-radix over the referent domain. ``at`` returns ``(k, contents)``.
    """

    def __init__(self, referent: Domain, m: int, width: int):
        self.referent = referent
        self.m = m
        self.k_max = min(m, max(1, width))
        n = referent.size
        self.blocks = [n ** k for k in range(1, self.k_max + 1)]
        self.size = sum(self.blocks)

    def _at(self, i):
        for k, block in enumerate(self.blocks, start=1):
            if i < block:
                digits = _digits(i, [self.referent.size] * k)
                return k, tuple(self.referent._at(d) for d in digits)
            i -= block
        raise IndexError(i)

    def materialise(self, i: int, heap: Heap) -> Tuple[Ref, ...]:
        k, contents = self.at(i)
        cells = [heap.alloc(v) for v in contents]
        return tuple(cells[min(p, k) - 1] for p in range(1, self.m + 1))

    def _index(self, value):
        return None


class TupleDomain:
    """Argument tuples (plus initial heap) for a function or method.

    Components, in order of first appearance among the parameters: an
    ordinary domain per non-reference parameter and one
    :class:`AliasGroupDomain` per distinct referent type.
    """

    def __init__(self, params: Sequence[A.Param], components: Sequence[Tuple[object, Domain]]):
        self.params = tuple(params)
        self.components = tuple(components)
        size = 1
        for _, d in self.components:
            size *= d.size
        self.size = size

    def decode(self, i: int) -> Tuple[Tuple, Heap]:
        if not 0 <= i < self.size:
            raise IndexError(f"index {i} outside domain of size {self.size}")
        heap = Heap()
        args: List[object] = [None] * len(self.params)
        digits = _digits(i, [d.size for _, d in self.components])
        for (slot, dom), digit in zip(self.components, digits):
            if isinstance(dom, AliasGroupDomain):
                for pos, ref in zip(slot, dom.materialise(digit, heap)):
                    args[pos] = ref
            else:
                args[slot] = dom._at(digit)
        return tuple(args), heap

    def __iter__(self):
        for i in range(self.size):
            yield self.decode(i)


def _mentions(t: A.TypeExpr, program: Program, kinds, seen=frozenset()) -> bool:
    if isinstance(t, kinds):
        return True
    if isinstance(t, A.ArrayType):
        return _mentions(t.elem, program, kinds, seen)
    if isinstance(t, A.RecordType):
        return any(_mentions(ft, program, kinds, seen) for _, ft in t.fields)
    if isinstance(t, A.UnionType):
        return any(_mentions(m, program, kinds, seen) for m in t.members)
    if isinstance(t, A.RefType):
        return _mentions(t.referent, program, kinds, seen)
    if isinstance(t, A.LambdaType):
        return any(_mentions(x, program, kinds, seen) for x in t.params + t.returns)
    if isinstance(t, A.NamedType) and t.name not in seen and t.name in program.types:
        return _mentions(program.types[t.name].type, program, kinds, seen | {t.name})
    return False


class _Builder:
    def __init__(self, params: DomainParams, program: Optional[Program]):
        self.params = params
        self.program = program
        self.memo: Dict[Tuple[str, int], Domain] = {}

    def unsupported(self, t: A.TypeExpr) -> UnsupportedType:
        return UnsupportedType(f"unsupported type for generation: {format_type(t)} "
                               "(references are only generated as top-level parameters)")

    def build(self, t: A.TypeExpr, ctx: Dict[int, int], top: bool = False) -> Domain:
        p = self.params
        if isinstance(t, A.NullType):
            d: Domain = NullDomain()
        elif isinstance(t, A.BoolType):
            d = BoolDomain()
        elif isinstance(t, A.IntType):
            d = IntDomain(p.int_min, p.int_max)
        elif isinstance(t, A.ArrayType):
            d = ArrayDomain(self.build(t.elem, ctx), p.max_array_len)
        elif isinstance(t, A.RecordType):
            d = RecordDomain(t.field_names(), [self.build(ft, ctx) for _, ft in t.fields])
        elif isinstance(t, A.UnionType):
            d = UnionDomain([self.build(m, ctx) for m in t.members])
        elif isinstance(t, A.NamedType):
            return self.named(t, ctx)
        elif isinstance(t, A.RefType):
            if not top or self.has_ref(t.referent):
                raise self.unsupported(t)
            d = RefDomain(self.build(t.referent, ctx))
        elif isinstance(t, A.LambdaType):
            if any(self.has_ref(x) for x in t.params + t.returns):
                raise self.unsupported(t)
            inputs = ProductDomain([self.build(x, ctx) for x in t.params])
            if len(t.returns) == 1:
                outputs = self.build(t.returns[0], ctx)
            else:
                outputs = ProductDomain([self.build(x, ctx) for x in t.returns])
            d = LambdaDomain(t, inputs, outputs, p.max_rotation)
        else:
            raise TypeError(f"not a type: {t!r}")
        d.elem_type = t
        return d

    def has_ref(self, t: A.TypeExpr) -> bool:
        if self.program is None:
            return _mentions(t, _NO_PROGRAM, A.RefType)
        return _mentions(t, self.program, A.RefType)

    def named(self, t: A.NamedType, ctx: Dict[int, int]) -> Domain:
        if self.program is None or t.name not in self.program.types:
            raise KeyError(f"unknown type {t.name!r}")
        decl = self.program.types[t.name]
        scc = self.program.components.get(t.name)
        if scc is None:
            d = self.build(decl.type, ctx)
            return d
        depth = self.params.max_depth if scc not in ctx else ctx[scc] - 1
        if depth < 0:
            return EmptyDomain()
        key = (t.name, depth)
        d = self.memo.get(key)
        if d is None:
            inner = dict(ctx)
            inner[scc] = depth
            d = self.build(decl.type, inner)
            self.memo[key] = d
        return d


class _NoProgram:
    types: Dict[str, A.TypeDecl] = {}
    components: Dict[str, int] = {}


_NO_PROGRAM = _NoProgram()


def build(t: A.TypeExpr, params: DomainParams = DomainParams(), program: Optional[Program] = None) -> Domain:
    """Domain of underlying values for ``t`` (named-type invariants are not applied)."""
    return _Builder(params, program).build(t, {}, top=True)


def build_inputs(decl: A.FunctionDecl, params: DomainParams = DomainParams(),
                 program: Optional[Program] = None) -> TupleDomain:
    builder = _Builder(params, program)
    components: List[Tuple[object, Domain]] = []
    groups: Dict[A.TypeExpr, List[int]] = {}
    for pos, p in enumerate(decl.params):
        t = _strip_named_ref(p.type, program)
        if isinstance(t, A.RefType):
            if builder.has_ref(t.referent):
                raise builder.unsupported(p.type)
            members = groups.get(t.referent)
            if members is None:
                groups[t.referent] = members = []
                components.append((members, t.referent))
            members.append(pos)
        else:
            components.append((pos, builder.build(p.type, {})))
    resolved: List[Tuple[object, Domain]] = []
    for slot, dom in components:
        if isinstance(slot, list):
            referent = builder.build(dom, {})
            resolved.append((tuple(slot), AliasGroupDomain(referent, len(slot), params.alias_width)))
        else:
            resolved.append((slot, dom))
    return TupleDomain(decl.params, resolved)


def _strip_named_ref(t: A.TypeExpr, program: Optional[Program]) -> A.TypeExpr:
    """Look through type aliases so ``type P is &int`` groups like ``&int``."""
    seen = set()
    while isinstance(t, A.NamedType) and program is not None and t.name in program.types:
        if t.name in seen:
            break
        seen.add(t.name)
        underlying = program.types[t.name].type
        if not isinstance(underlying, (A.NamedType, A.RefType)):
            break
        t = underlying
    return t
