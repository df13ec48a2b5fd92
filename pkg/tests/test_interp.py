from fractions import Fraction
import math

import pytest
from hypothesis import given, strategies as st

from conftest import corpus
from wyscheck.domains import DomainParams, build
from wyscheck.interp import (
    FALSE, TRUE, Array, Budget, Fault, FaultKind, Heap, Interpreter, Record, Ref, format_trace,
    format_value, truncating_divmod,
)
from wyscheck.syntax import compile_text, parse_expr_text, parse_type_text


def ev(text, **env):
    return Interpreter(compile_text("")).eval(parse_expr_text(text), env)


def fault_of(fn, *args, **kw):
    with pytest.raises(Fault) as info:
        fn(*args, **kw)
    return info.value


@pytest.mark.parametrize("text,expected", [
    ("1 + 2 * 3", 7),
    ("7 / 2", 3),
    ("-7 / 2", -3),
    ("7 / -2", -3),
    ("-7 % 2", -1),
    ("7 % -2", 1),
    ("|[1, 2, 3]|", 3),
    ("[1, 2, 3][1]", 2),
    ("[7; 2]", Array((7, 7))),
    ("2 < 3 && 3 <= 3", TRUE),
    ("1 == 1 ==> 2 == 3", FALSE),
    ("false ==> 1 / 0 == 0", TRUE),
    ("false && 1 / 0 == 0", FALSE),
    ("true || [1][5] == 0", TRUE),
    ("all { i in 0..0 | false }", TRUE),
    ("some { i in 0..0 | true }", FALSE),
    ("all { i in 0..3 | i < 3 }", TRUE),
    ("some { i in 1..4 | i * i == 9 }", TRUE),
    ("{a: 1, b: 2} == {b: 2, a: 1}", TRUE),
    ("{a: 1, b: 2}.b", 2),
    ("null == null", TRUE),
    ("true == 1", FALSE),
    ("3 is int", TRUE),
    ("null is int|null", TRUE),
    ("[1] is bool[]", FALSE),
])
def test_eval(text, expected):
    assert ev(text) == expected


def test_variables_in_env():
    assert ev("xs[i] + 1", xs=Array((4, 5)), i=1) == 6


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(-1000, 1000).filter(bool))
def test_division_truncates_toward_zero(a, b):
    q, r = truncating_divmod(a, b)
    assert q == math.trunc(Fraction(a, b))
    assert a == b * q + r
    assert abs(r) < abs(b) and (r == 0 or (r < 0) == (a < 0))


@pytest.mark.parametrize("text,kind", [
    ("1 / 0", FaultKind.DivideByZero),
    ("1 % 0", FaultKind.DivideByZero),
    ("[1, 2][2]", FaultKind.IndexOutOfBounds),
    ("[1, 2][-1]", FaultKind.IndexOutOfBounds),
    ("all { i in 3..1 | true }", FaultKind.NegativeArrayRange),
    ("|2..1|", FaultKind.NegativeArrayRange),
    ("[0; -1]", FaultKind.NegativeArrayRange),
    ("1 + true", FaultKind.RuntimeTypeError),
    ("(bool) 3", FaultKind.RuntimeTypeError),
    ("{a: 1}.b", FaultKind.RuntimeTypeError),
])
def test_eval_faults(text, kind):
    assert fault_of(ev, text).kind is kind


def test_decrement_call():
    it = Interpreter(corpus("decrement"))
    assert it.call("decrement", (1,)).values == (0,)
    f = fault_of(it.call, "decrement", (0,))
    assert f.kind is FaultKind.PreconditionViolation
    assert [str(fr) for fr in f.trace] == ["decrement(0)"]


def test_postcondition_violation():
    program = corpus("failtest_r_gt_1")
    f = fault_of(Interpreter(program).call, "f", (1,))
    assert f.kind is FaultKind.PostconditionViolation
    assert f.span.line == 1
    assert Interpreter(program).call("f", (2,)).values == (2,)


def test_overloads():
    it = Interpreter(corpus("max"))
    assert it.call("max", (3, -1)).values == (3,)
    assert it.call("max", (Array((1, 5, 2)), 0)).values == (5,)


def test_argument_invariant():
    program = corpus("sum")
    it = Interpreter(program)
    assert it.call("sum", (Array((1, 2)),)).values == (3,)
    f = fault_of(it.call, "sum", (Array((-1,)),))
    assert f.kind is FaultKind.PreconditionViolation


def test_return_type_invariant():
    program = compile_text("type nat is (int n) where n >= 0\n"
                           "function f(int x) -> (nat r):\n    return x\n")
    f = fault_of(Interpreter(program).call, "f", (-1,))
    assert f.kind is FaultKind.TypeInvariantViolation


def test_local_assignment_invariant():
    program = compile_text("type nat is (int n) where n >= 0\n"
                           "function f(int x) -> (int r):\n    nat y = 0\n    y = x\n    return y\n")
    it = Interpreter(program)
    assert it.call("f", (2,)).values == (2,)
    assert fault_of(it.call, "f", (-2,)).kind is FaultKind.TypeInvariantViolation


def test_structural_mismatch_is_runtime_type_error():
    program = compile_text("function f(int|null x) -> (int r):\n    return (int) x\n")
    assert fault_of(Interpreter(program).call, "f", (None,)).kind is FaultKind.RuntimeTypeError


def test_slice_admission():
    program = corpus("slice")
    it = Interpreter(program)
    decl = program.functions["slice"][0]
    assert it.admit(decl, (Array(()), 0, 0))
    assert it.admit(decl, (Array((1,)), 0, 1))
    assert not it.admit(decl, (Array(()), 1, 0))
    assert not it.admit(decl, (Array((1,)), 0, 2))
    assert it.call(decl, (Array((4, 5, 6)), 1, 3)).values == (Array((5, 6)),)


def test_check_clauses_reports_first_false():
    program = corpus("slice")
    decl = program.functions["slice"][0]
    it = Interpreter(program)
    env = {"items": Array((1,)), "start": 0, "end": 2}
    assert it.check_clauses(decl.requires, env) == 0
    env["end"] = 1
    assert it.check_clauses(decl.requires, env) is None


def test_loop_invariant_checked():
    program = compile_text("function f(int n) -> (int r):\n    int i = 0\n"
                           "    while i < n where i <= 2:\n        i = i + 1\n    return i\n")
    it = Interpreter(program)
    assert it.call("f", (2,)).values == (2,)
    f = fault_of(it.call, "f", (3,))
    assert f.kind is FaultKind.LoopInvariantViolation


def test_loop_invariant_on_entry():
    program = compile_text("function f(int n) -> (int r):\n"
                           "    while n < 0 where n >= 0:\n        n = n + 1\n    return n\n")
    assert fault_of(Interpreter(program).call, "f", (-1,)).kind is FaultKind.LoopInvariantViolation


def test_assert_statement():
    program = compile_text("function f(int n) -> (int r):\n    assert n != 3\n    return n\n")
    assert fault_of(Interpreter(program).call, "f", (3,)).kind is FaultKind.AssertionFailure


def test_swap_mutates_heap():
    program = corpus("swap")
    heap = Heap()
    x, y = heap.alloc(TRUE), heap.alloc(FALSE)
    out = Interpreter(program).call("swap", (x, y), heap)
    assert out.heap.load(x) == FALSE and out.heap.load(y) == TRUE
    heap = Heap()
    z = heap.alloc(TRUE)
    out = Interpreter(program).call("swap", (z, z), heap)
    assert out.heap.load(z) == TRUE


def test_method_postcondition_sees_post_state():
    program = corpus("swap")
    heap = Heap()
    p, q = heap.alloc(1), heap.alloc(2)
    Interpreter(program).call("copy", (p, q), heap)
    assert heap.literal() == "{&1=2, &2=2}"


def test_function_may_not_write_heap():
    program = compile_text("function f(&int p) -> (int r):\n    *p = 1\n    return 0\n")
    heap = Heap()
    f = fault_of(Interpreter(program).call, "f", (heap.alloc(0),), heap)
    assert f.kind is FaultKind.RuntimeTypeError


def test_function_may_not_call_method():
    program = compile_text("method m(&int p):\n    *p = 1\n"
                           "function f(&int p) -> (int r):\n    m(p)\n    return 0\n")
    heap = Heap()
    f = fault_of(Interpreter(program).call, "f", (heap.alloc(0),), heap)
    assert f.kind is FaultKind.RuntimeTypeError


def test_recursive_type_conformance():
    program = corpus("list")
    it = Interpreter(program)
    lst = Record((("value", 1), ("next", Record((("value", 2), ("next", None))))))
    assert it.call("length", (lst,)).values == (2,)
    assert it.conforms(lst, parse_type_text("List"))
    assert not it.conforms(Record((("value", 1),)), parse_type_text("List"))


def test_open_record_conformance():
    it = Interpreter(compile_text(""))
    t = parse_type_text("{int x, ...}")
    assert it.conforms(Record((("x", 1), ("y", TRUE))), t)
    assert not it.conforms(Record((("y", 1),)), t)
    assert not it.conforms(Record((("x", 1), ("y", TRUE))), parse_type_text("{int x}"))


def test_stack_overflow():
    program = compile_text("function f(int n) -> (int r):\n    return f(n + 1)\n")
    f = fault_of(Interpreter(program).call, "f", (0,), budget=Budget(max_depth=50))
    assert f.kind is FaultKind.StackOverflow
    assert len(f.trace) == 51


def test_default_depth_cap_survives_python_limits():
    program = compile_text("function f(int n) -> (int r):\n    return f(n + 1) + 1\n")
    f = fault_of(Interpreter(program).call, "f", (0,))
    assert f.kind is FaultKind.StackOverflow


def test_timeout():
    program = compile_text("function f(int n) -> (int r):\n    while true:\n        n = n + 1\n    return n\n")
    f = fault_of(Interpreter(program).call, "f", (0,), budget=Budget.seconds(0.1))
    assert f.kind is FaultKind.Timeout


def test_lambda_application():
    program = corpus("lambda")
    t = parse_type_text("function(int)->(int)")
    lam = build(t, DomainParams(-1, 1), program).at(1)
    it = Interpreter(program)
    # rotation 1 over [-1,0,1]: -1 -> 0, 0 -> 1, 1 -> -1
    assert it.call("apply_twice", (lam, -1)).values == (1,)
    f = fault_of(it.call, "apply_twice", (lam, 5))
    assert f.kind is FaultKind.LambdaDomainExhausted


def test_multiple_returns():
    program = compile_text("function two(int x) -> (int a, int b) ensures a < b:\n    return x, x + 1\n")
    assert Interpreter(program).call("two", (3,)).values == (3, 4)


def test_vector_set_trace_golden():
    program = corpus("vector_set")
    vec = Record((("items", Array((-1,))), ("length", 0)))
    f = fault_of(Interpreter(program).call, "set", (vec, 0, -1))
    assert f.kind is FaultKind.NegativeArrayRange
    text = format_trace(f, program.sources)
    lines = text.split("\n")
    assert lines[0].endswith("vector_set.wys:7: negative array range")
    assert lines[-3:] == [
        "Stack Trace:",
        "--> equals([-1],[-1],1,0)",
        "--> set({items=[-1], length=0},0,-1)",
    ]
    caret = lines[2]
    assert lines[1][caret.index("^"):caret.rindex("^") + 1] == "start..end"


def test_heap_invariant_fault():
    program = corpus("heap")
    h = Record((("data", Array(())), ("len", 2)))
    f = fault_of(Interpreter(program).call, "size", (h, ))
    assert f.kind is FaultKind.IndexOutOfBounds
    assert [str(x) for x in f.trace] == ["size({data=[], len=2})"]


def test_format_value_literals():
    assert format_value(Array((1, 2))) == "[1,2]"
    assert format_value(Record((("f", TRUE), ("g", None)))) == "{f=true, g=null}"
    assert format_value(Ref(3)) == "&3"


def test_invariant_cache_shared():
    program = corpus("sum")
    cache = {}
    it = Interpreter(program, cache)
    it.call("sum", (Array((1,)),))
    assert ("nat", 1) in cache


def test_heap_where_clause_faults_at_data_1():
    program = corpus("heap")
    decl = program.types["Heap"]
    env = {"data": Array((0,)), "len": 2}
    f = fault_of(Interpreter(program).check_clauses, decl.wheres, env)
    assert f.kind is FaultKind.IndexOutOfBounds
    assert "index 1" in f.message


def test_conforms_examples():
    it = Interpreter(corpus("sum"))
    assert it.conforms(0, parse_type_text("nat"))
    assert not it.conforms(-1, parse_type_text("nat"))
    assert Interpreter(corpus("list")).conforms(None, parse_type_text("List"))
    assert not it.conforms(Record((("x", 0),)), parse_type_text("{int x, int y, ...}"))


def test_vacuous_quantifier_skips_body():
    assert ev("all { i in 0..0 | 1 / 0 > 0 }") == TRUE


def test_trace_without_frames():
    program = corpus("decrement")
    f = Fault(FaultKind.AssertionFailure, "assertion failed", program.functions["decrement"][0].requires[0].span)
    lines = format_trace(f, program.sources).split("\n")
    assert len(lines) == 3 and "Stack Trace:" not in lines
    assert lines[2].strip() == "^" * len("x > 0")


def test_single_frame_trace():
    program = compile_text("function f(int n) -> (int r):\n    assert n != 3\n    return n\n", "a.wys")
    f = fault_of(Interpreter(program).call, "f", (3,))
    assert format_trace(f, program.sources).split("\n") == [
        "a.wys:2: assertion failed", "    assert n != 3", "           ^^^^^^", "Stack Trace:", "--> f(3)",
    ]


def test_functions_leave_heap_unchanged():
    program = compile_text("function peek(&int p) -> (int r):\n    return *p + 1\n")
    heap = Heap()
    p = heap.alloc(4)
    before = heap.copy()
    assert Interpreter(program).call("peek", (p,), heap).values == (5,)
    assert heap == before


def test_reference_equality_is_identity():
    heap = Heap()
    a, b = heap.alloc(1), heap.alloc(1)
    assert ev("a == b", a=a, b=b) == FALSE
    assert ev("a == a", a=a) == TRUE
