import json
import time

import pytest

from conftest import corpus
from wyscheck.domains import build_inputs
from wyscheck.harness import (
    SCOPES, TestConfig, format_json, format_text, run_all, sub_seed,
)
from wyscheck.interp import Fault, FaultKind, Interpreter, format_trace
from wyscheck.syntax import compile_text


def only(report):
    assert len(report.results) == 1
    return report.results[0]


def replay(program, result):
    decl = next(d for d in program.callables if d.signature == result.signature)
    for failure in result.failures:
        with pytest.raises(Fault) as info:
            Interpreter(program).call(decl, failure.args, failure.heap.copy())
        assert info.value.kind is failure.kind
        assert format_trace(info.value, program.sources) == format_trace(failure.fault, program.sources)


def test_scopes_table():
    assert SCOPES["tiny"].as_tuple() == (0, 0, 0, 0, 0, 0)
    assert SCOPES["small"].as_tuple() == (-1, 1, 1, 1, 1, 1)
    assert SCOPES["medium"].as_tuple() == (-2, 2, 2, 2, 2, 2)
    assert SCOPES["large"].as_tuple() == (-3, 3, 3, 3, 3, 3)
    assert SCOPES["huge"].as_tuple() == (-4, 4, 4, 4, 4, 4)


@pytest.mark.parametrize("scope", sorted(SCOPES))
def test_fail_test_flagged_at_every_scope(scope):
    program = corpus("failtest_r_gt_1")
    start = time.perf_counter()
    r = only(run_all(program, TestConfig.for_scope(scope, max_failures=100)))
    assert time.perf_counter() - start < 1.0
    assert r.failures and all(f.kind is FaultKind.PostconditionViolation for f in r.failures)
    assert {f.args[0] for f in r.failures} == {x for x in range(SCOPES[scope].int_min, SCOPES[scope].int_max + 1) if x <= 1}
    replay(program, r)


def test_listing1_never_fails():
    report = run_all(corpus("listing1"), TestConfig.for_scope("medium"))
    assert [r.name for r in report.results] == ["f", "g"]
    assert all(not r.failures for r in report.results)


def test_count_without_loop_invariant_passes():
    assert not run_all(corpus("count"), TestConfig.for_scope("medium")).failed


def test_decrement_and_max_pass():
    program = compile_text(corpus("decrement").source.text + "\n" + corpus("max").source.text)
    report = run_all(program, TestConfig.for_scope("medium"))
    assert len(report.results) == 3
    assert report.exit_code == 0


def test_empty_program():
    report = run_all(compile_text(""), TestConfig())
    assert report.results == [] and report.exit_code == 0


def test_one_failing_one_passing():
    program = compile_text(corpus("failtest_r_gt_1").source.text + "\n" + corpus("decrement").source.text)
    report = run_all(program, TestConfig.for_scope("medium"))
    assert len(report.results) == 2
    assert [r.name for r in report.failed] == ["f"]
    assert report.exit_code == 1


@pytest.mark.parametrize("name", ["decrement", "max", "sum", "slice"])
def test_clean_corpus_at_large_scope(name):
    report = run_all(corpus(name), TestConfig.for_scope("large"))
    assert not report.failed
    for r in report.results:
        assert r.sampled == r.domain_size == r.executed + r.meaningless + r.inconclusive


def test_rate_one_visits_everything():
    program = corpus("slice")
    r = only(run_all(program, TestConfig.for_scope("medium", record_indices=True)))
    assert r.indices == list(range(r.domain_size))


def test_sampled_subset_of_exhaustive():
    program = corpus("slice")
    full = only(run_all(program, TestConfig.for_scope("medium", record_indices=True)))
    part = only(run_all(program, TestConfig.for_scope("medium", rate=0.1, record_indices=True)))
    assert len(part.indices) == round(0.1 * full.domain_size)
    assert set(part.indices) <= set(full.indices)
    assert part.sampled == part.executed + part.meaningless + part.inconclusive


def test_slice_counts_match_filter():
    program = corpus("slice")
    r = only(run_all(program, TestConfig.for_scope("medium")))
    decl = program.functions["slice"][0]
    domain = build_inputs(decl, SCOPES["medium"], program)
    admitted = sum(Interpreter(program).admit(decl, args, heap) for args, heap in domain)
    assert r.executed == admitted
    assert r.meaningless == domain.size - admitted


def test_heap_out_of_bounds_in_invariant():
    program = corpus("heap")
    r = only(run_all(program, TestConfig.for_scope("medium", max_failures=10 ** 6)))
    kinds = {f.kind for f in r.failures}
    assert FaultKind.IndexOutOfBounds in kinds
    replay(program, r)


def test_vector_set_reports_negative_range():
    program = corpus("vector_set")
    report = run_all(program, TestConfig.for_scope("medium", functions=("set",)))
    r = only(report)
    assert r.failures[0].kind is FaultKind.NegativeArrayRange
    assert [f.name for f in r.failures[0].fault.trace] == ["equals", "set"]
    replay(program, r)


def test_replay_every_failure():
    for name in ("failtest_r_gt_1", "heap", "vector_set"):
        program = corpus(name)
        for r in run_all(program, TestConfig.for_scope("small", max_failures=50)).results:
            replay(program, r)


def test_methods_with_references():
    report = run_all(corpus("swap"), TestConfig.for_scope("medium"))
    assert [r.domain_size for r in report.results] == [6, 5 + 25]
    assert not report.failed


def test_lambda_outside_domain_is_inconclusive():
    program = compile_text("function h(function(int)->(int) f, int x) -> (int r):\n    return f(x + 10)\n")
    r = only(run_all(program, TestConfig.for_scope("small")))
    assert r.inconclusive == r.sampled == r.domain_size
    assert not r.failures


def test_timeout_is_not_failure():
    program = compile_text("function f(int n) -> (int r):\n    while true:\n        n = n + 1\n    return n\n")
    r = only(run_all(program, TestConfig.for_scope("small", timeout=0.2)))
    assert r.timed_out and not r.failures and r.status == "TIMEOUT"


def test_unsupported_parameter_is_error():
    program = compile_text("method m((&int)[] ps):\n    return\n")
    report = run_all(program, TestConfig())
    assert report.results[0].error and report.exit_code == 2


def test_recursive_parameter_at_depth_zero():
    program = compile_text("type L is {int v, L next} | null\n"
                           "function f(L l) -> (int r):\n    return 0\n")
    r = only(run_all(program, TestConfig.for_scope("tiny")))
    assert r.domain_size == 1 and r.executed == 1


def test_skip_and_filter():
    program = compile_text("function main() -> (int r):\n    return 0\n"
                           "function a(int x) -> (int r):\n    return x\n"
                           "function b(int x) -> (int r):\n    return x\n")
    assert [r.name for r in run_all(program, TestConfig()).results] == ["a", "b"]
    assert [r.name for r in run_all(program, TestConfig(functions=("b",))).results] == ["b"]
    assert [r.name for r in run_all(program, TestConfig(skip=())).results] == ["main", "a", "b"]


def test_sub_seeds_differ_per_function():
    program = corpus("max")
    a, b = program.functions["max"]
    assert sub_seed(0, a) != sub_seed(0, b)
    assert sub_seed(0, a) == sub_seed(0, a)


def test_fresh_heap_per_test():
    program = corpus("swap")
    config = TestConfig.for_scope("medium", record_indices=True)
    first = run_all(program, config)
    second = run_all(program, config)
    assert format_json([first], config) == format_json([second], config)


def test_reports_deterministic_and_parallel_agnostic():
    program = corpus("vector_set")
    config = TestConfig.for_scope("small", max_failures=3)
    serial = format_json([run_all(program, config)], config)
    assert serial == format_json([run_all(program, config)], config)
    parallel = format_json([run_all(program, config, jobs=2)], config)
    assert serial == parallel
    doc = json.loads(serial)
    assert doc["schema"] == 1
    assert "elapsed" not in serial


def test_text_report():
    program = corpus("failtest_r_gt_1")
    config = TestConfig.for_scope("small")
    text = format_text([run_all(program, config)], config)
    assert "seed=0" in text and "int=-1..1" in text
    assert "counterexample: f(-1)" in text
    assert "--> f(-1)" in text


def test_monotone_detection():
    program = corpus("heap")
    for scope in ("small", "medium", "large"):
        assert run_all(program, TestConfig.for_scope(scope)).failed


def test_bad_config():
    with pytest.raises(ValueError):
        TestConfig(rate=0)
    with pytest.raises(ValueError):
        TestConfig(max_failures=0)
