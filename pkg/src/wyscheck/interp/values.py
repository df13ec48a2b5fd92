"""Runtime values and the heap.

Representation:

* null      -> ``None``
* int       -> Python ``int`` (unbounded)
* bool      -> :class:`Bool` (never a Python bool, so ``true != 1``)
* arrays    -> :class:`Array`
* records   -> :class:`Record` (equality ignores field order)
* &T        -> :class:`Ref`
* lambdas   -> :class:`LambdaValue`
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Tuple


@dataclass(frozen=True)
class Bool:
    value: bool

    def __repr__(self) -> str:
        return "true" if self.value else "false"


TRUE = Bool(True)
FALSE = Bool(False)


def as_bool(b: bool) -> Bool:
    return TRUE if b else FALSE


@dataclass(frozen=True)
class Array:
    items: Tuple[Any, ...] = ()

    def __len__(self) -> int:
        return len(self.items)

    def __repr__(self) -> str:
        return format_value(self)


@dataclass(frozen=True, eq=False)
class Record:
    fields: Tuple[Tuple[str, Any], ...]

    def __post_init__(self):
        object.__setattr__(self, "_map", dict(self.fields))

    def get(self, name: str):
        return self._map[name]

    def has(self, name: str) -> bool:
        return name in self._map

    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.fields)

    def replace(self, name: str, value) -> "Record":
        return Record(tuple((n, value if n == name else v) for n, v in self.fields))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Record):
            return NotImplemented
        return self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        return format_value(self)


@dataclass(frozen=True)
class Ref:
    cell: int

    def __repr__(self) -> str:
        return f"&{self.cell}"


@dataclass(frozen=True)
class LambdaValue:
    """A generated function: input index ``i`` maps to output index ``(i + rotation) % |out|``."""

    signature: str
    rotation: int
    inputs: Any = field(compare=False, repr=False)
    outputs: Any = field(compare=False, repr=False)
    arity: int = field(default=1, compare=False, repr=False)

    def __repr__(self) -> str:
        return format_value(self)


def format_value(v) -> str:
    """Render a value in literal syntax (``{f=v, ...}``, ``[a,b]``)."""
    if v is None:
        return "null"
    if isinstance(v, Bool):
        return "true" if v.value else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Array):
        return "[" + ",".join(format_value(x) for x in v.items) + "]"
    if isinstance(v, Record):
        return "{" + ", ".join(f"{n}={format_value(x)}" for n, x in v.fields) + "}"
    if isinstance(v, Ref):
        return f"&{v.cell}"
    if isinstance(v, LambdaValue):
        return f"{v.signature}[rotation={v.rotation}]"
    if isinstance(v, tuple):
        return "(" + ",".join(format_value(x) for x in v) + ")"
    return repr(v)


def to_json(v):
    """A JSON-friendly rendering that keeps the value's shape."""
    if v is None or isinstance(v, int):
        return v
    if isinstance(v, Bool):
        return v.value
    if isinstance(v, Array):
        return [to_json(x) for x in v.items]
    if isinstance(v, Record):
        return {n: to_json(x) for n, x in v.fields}
    return format_value(v)


class Heap:
    """Mutable store of reference cells; ids are handed out in allocation order."""

    __slots__ = ("cells", "next_id")

    def __init__(self, cells: Optional[Dict[int, Any]] = None, next_id: int = 1):
        self.cells: Dict[int, Any] = dict(cells or {})
        self.next_id = max([next_id] + [c + 1 for c in self.cells])

    def alloc(self, value) -> Ref:
        ref = Ref(self.next_id)
        self.cells[self.next_id] = value
        self.next_id += 1
        return ref

    def load(self, ref: Ref):
        return self.cells[ref.cell]

    def store(self, ref: Ref, value) -> None:
        if ref.cell not in self.cells:
            raise KeyError(ref.cell)
        self.cells[ref.cell] = value

    def copy(self) -> "Heap":
        return Heap(self.cells, self.next_id)

    def __eq__(self, other) -> bool:
        return isinstance(other, Heap) and self.cells == other.cells

    def __len__(self) -> int:
        return len(self.cells)

    def literal(self) -> str:
        return "{" + ", ".join(f"&{c}={format_value(v)}" for c, v in sorted(self.cells.items())) + "}"

    def __repr__(self) -> str:
        return f"Heap({self.literal()})"


def contains_ref(v) -> bool:
    if isinstance(v, Ref):
        return True
    if isinstance(v, Array):
        return any(contains_ref(x) for x in v.items)
    if isinstance(v, Record):
        return any(contains_ref(x) for _, x in v.fields)
    if isinstance(v, tuple):
        return any(contains_ref(x) for x in v)
    return False


def iter_refs(values: Iterable) -> Iterable[Ref]:
    for v in values:
        if isinstance(v, Ref):
            yield v
        elif isinstance(v, Array):
            yield from iter_refs(v.items)
        elif isinstance(v, Record):
            yield from iter_refs(x for _, x in v.fields)
