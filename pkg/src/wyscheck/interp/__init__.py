"""Interpreter, runtime values and faults."""
from .faults import Fault, FaultKind, Frame, format_trace
from .interpreter import Budget, Interpreter, Returned, run_deep, truncating_divmod
from .values import (
    FALSE, TRUE, Array, Bool, Heap, LambdaValue, Record, Ref, as_bool, format_value, to_json,
)

__all__ = [
    "Array", "Bool", "Budget", "FALSE", "Fault", "FaultKind", "Frame", "Heap", "Interpreter",
    "LambdaValue", "Record", "Ref", "Returned", "TRUE", "as_bool", "format_trace", "format_value",
    "run_deep", "to_json", "truncating_divmod",
]
