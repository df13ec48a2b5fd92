"""Acceptance criteria, one test each.

Each test prints a single ``PASS``/``FAIL`` line. Run with ``pytest -s`` to
see them, or execute this file directly.
"""
import io
import itertools
import sys
import time
from contextlib import redirect_stdout

import pytest
from scipy.stats import chisquare

from conftest import corpus, corpus_path
from test_domains import CORPUS_TYPES, brute
from test_mutate import SLICE_DETECTABLE, SUM_DETECTABLE, pick
from wyscheck.cli import main as cli_main
from wyscheck.domains import DomainParams, build, build_inputs
from wyscheck.harness import SCOPES, TestConfig, run_all
from wyscheck.interp import FALSE, TRUE, Array, Fault, Record, FaultKind, Interpreter, format_trace, format_value
from wyscheck.mutate import enumerate_sites, run_campaign
from wyscheck.sampler import select, target_count
from wyscheck.syntax import ast as A
from wyscheck.syntax import compile_text, parse_type_text


def verdict(number, title, problems):
    status = "PASS" if not problems else "FAIL"
    line = f"{status} criterion {number}: {title}"
    if problems:
        line += " -- " + "; ".join(problems[:5])
    print(line)
    assert not problems, line


def test_criterion_01_domain_sizes():
    problems = []
    expected = [
        ("bool[]", DomainParams(max_array_len=3), None, 15),
        ("{bool tag, int data}", DomainParams(-2, 2), None, 10),
        ("bool|int", DomainParams(-3, 3), None, 9),
    ]
    for text, params, program, size in expected:
        got = build(parse_type_text(text), params, program).size
        if got != size:
            problems.append(f"{text}: {got} != {size}")
    got = build(A.NamedType("List"), DomainParams(-3, 3, max_depth=3), corpus("list")).size
    if got != 400:
        problems.append(f"List: {got} != 400")
    for scope in ("tiny", "small", "medium"):
        for name, program, t in CORPUS_TYPES:
            oracle = brute(t, SCOPES[scope], program)
            if build(t, SCOPES[scope], program).size != len(oracle):
                problems.append(f"{name} {t} at {scope}")
    verdict(1, "domain-size formulas agree with brute force", problems)


def test_criterion_02_reference_aliasing():
    problems = []
    program = corpus("swap")
    d = build_inputs(program.functions["swap"][0], DomainParams(alias_width=2), program)
    got = {(tuple(a.cell for a in args), heap.literal()) for args, heap in d}
    oracle = {((1, 1), "{&1=false}"), ((1, 1), "{&1=true}")}
    oracle |= {((1, 2), f"{{&1={a}, &2={b}}}") for a, b in itertools.product(["false", "true"], repeat=2)}
    if d.size != 6 or got != oracle:
        problems.append(f"swap: {sorted(got)}")
    three = compile_text("method m(&bool a, &bool b, &bool c):\n    *a = *b\n")
    d3 = build_inputs(three.functions["m"][0], DomainParams(alias_width=3), three)
    got3 = {(tuple(a.cell for a in args), heap.literal()) for args, heap in d3}
    oracle3 = set()
    for k, pattern in ((1, (1, 1, 1)), (2, (1, 2, 2)), (3, (1, 2, 3))):
        for contents in itertools.product(["false", "true"], repeat=k):
            cells = ", ".join(f"&{i + 1}={v}" for i, v in enumerate(contents))
            oracle3.add((pattern, "{" + cells + "}"))
    if d3.size != 14 or got3 != oracle3:
        problems.append(f"three refs: size {d3.size}")
    verdict(2, "reference aliasing configurations (6 and 14)", problems)


def test_criterion_03_lambda_rotation():
    d = build(parse_type_text("function(int)->(bool)"), DomainParams(-1, 1))

    def table(lam):
        return {x: lam.outputs.at((lam.inputs.index_of((x,)) + lam.rotation) % lam.outputs.size)
                for x in (-1, 0, 1)}

    problems = []
    if table(d.at(0)) != {-1: FALSE, 0: TRUE, 1: FALSE}:
        problems.append(f"rotation 0 gives {table(d.at(0))}")
    if table(d.at(0)) == table(d.at(1)):
        problems.append("rotations 0 and 1 agree everywhere")
    verdict(3, "lambda rotation listing", problems)


def test_criterion_04_pipeline_filtering():
    program = corpus("slice")
    decl = program.functions["slice"][0]
    it = Interpreter(program)
    cases = [((Array(()), 0, 0), True), ((Array((1,)), 0, 1), True),
             ((Array(()), 1, 0), False), ((Array((1,)), 0, 2), False)]
    problems = [f"{format_value(args)} admitted={not want}" for args, want in cases
                if it.admit(decl, args) != want]
    verdict(4, "slice precondition filtering", problems)


def test_criterion_05_fail_tests():
    problems = []
    program = corpus("failtest_r_gt_1")
    for scope in SCOPES:
        start = time.perf_counter()
        report = run_all(program, TestConfig.for_scope(scope))
        elapsed = time.perf_counter() - start
        if not report.failed:
            problems.append(f"not flagged at {scope}")
        if elapsed >= 1.0:
            problems.append(f"{scope} took {elapsed:.2f}s")
    for name in ("listing1", "count"):
        report = run_all(corpus(name), TestConfig.for_scope("medium"))
        if report.failed:
            problems.append(f"{name} reported failures")
    verdict(5, "fail test flagged, undetectable programs clean", problems)


def test_criterion_06_real_bugs():
    problems = []
    heap_report = run_all(corpus("heap"), TestConfig.for_scope("medium", max_failures=10 ** 6))
    kinds = {f.kind for r in heap_report.results for f in r.failures}
    if FaultKind.IndexOutOfBounds not in kinds:
        problems.append(f"heap faults: {sorted(k.name for k in kinds)}")
    program = corpus("vector_set")
    report = run_all(program, TestConfig.for_scope("medium", functions=("set",)))
    failures = report.results[0].failures
    if not failures:
        problems.append("vector set not flagged")
    else:
        trace = format_trace(failures[0].fault, program.sources).split("\n")
        frames = [line for line in trace if line.startswith("--> ")]
        if not trace[0].endswith(": negative array range") or trace[-3] != "Stack Trace:" or len(frames) != 2:
            problems.append("trace shape differs")
        if not (frames[0].startswith("--> equals(") and frames[1].startswith("--> set({items=")):
            problems.append(f"frames {frames}")
        vec = Record((("items", Array((-1,))), ("length", 0)))
        with pytest.raises(Fault) as info:
            Interpreter(program).call("set", (vec, 0, -1))
        golden = ["Stack Trace:", "--> equals([-1],[-1],1,0)", "--> set({items=[-1], length=0},0,-1)"]
        if format_trace(info.value, program.sources).split("\n")[-3:] != golden:
            problems.append("golden frames differ")
    verdict(6, "heap out-of-bounds and vector-set trace", problems)


def test_criterion_07_sampling():
    problems = []
    program = corpus("slice")
    r = run_all(program, TestConfig.for_scope("medium", record_indices=True)).results[0]
    if r.indices != list(range(r.domain_size)):
        problems.append("rate 1.0 is not exhaustive")
    for size in (1, 7, 10, 1000, 12345):
        for rate in (0.001, 0.01, 0.1, 0.25, 0.5, 1.0):
            want = min(size, max(1, int(rate * size + 0.5)))
            got = len(list(select(size, target_count(size, rate), 99)))
            if got != want:
                problems.append(f"N={size} r={rate}: {got} != {want}")
    counts = [0] * 10
    for seed in range(100_000):
        (i,) = select(10, 1, seed)
        counts[i] += 1
    p = chisquare(counts).pvalue
    if p <= 0.001:
        problems.append(f"chi-square p={p:.4g}")
    verdict(7, f"sampling exactness and uniformity (p={p:.3f})", problems)


def test_criterion_08_soundness():
    problems = []
    replayed = 0
    for name in ("failtest_r_gt_1", "heap", "vector_set"):
        program = corpus(name)
        for r in run_all(program, TestConfig.for_scope("medium", max_failures=200)).results:
            decl = next(d for d in program.callables if d.signature == r.signature)
            for f in r.failures:
                replayed += 1
                try:
                    Interpreter(program).call(decl, f.args, f.heap.copy())
                    problems.append(f"{f.call_text(r.name)} did not fault")
                except Fault as again:
                    if again.kind is not f.kind:
                        problems.append(f"{f.call_text(r.name)}: {again.kind.name} != {f.kind.name}")
    for name in ("decrement", "max", "sum", "slice"):
        if run_all(corpus(name), TestConfig.for_scope("large")).failed:
            problems.append(f"{name} reported failures at large scope")
    verdict(8, f"replay of {replayed} counterexamples, clean corpus", problems)


def test_criterion_09_mutation():
    problems = []
    start = time.perf_counter()
    for name, curated in (("sum", SUM_DETECTABLE), ("slice", SLICE_DETECTABLE)):
        program = corpus(name)
        report = run_campaign(program, TestConfig.for_scope("medium"), max_n=100, timeout=5)
        by_site = {(o.site.location, o.site.replacement): o for o in report.outcomes}
        if len(by_site) != len(enumerate_sites(program)):
            problems.append(f"{name}: not every site sampled")
        for key in curated:
            if by_site[key].outcome != "detected":
                problems.append(f"{name} {key} {by_site[key].outcome}")
        timeouts = [o for o in report.outcomes if o.outcome == "timeout"]
        if report.detected != sum(o.outcome == "detected" for o in report.outcomes) or \
                report.percentage != 100.0 * report.detected / report.sampled:
            problems.append(f"{name}: accounting")
        if name == "sum" and not timeouts:
            problems.append("sum: expected the i + 0 mutant to time out")
    sep = corpus("sep_constant")
    sep_report = run_campaign(sep, TestConfig.for_scope("medium"), sites=pick(sep, [("3:12", "2")]), timeout=5)
    if sep_report.outcomes[0].outcome != "undetected":
        problems.append("uniform constant mutant detected")
    elapsed = time.perf_counter() - start
    if elapsed >= 120:
        problems.append(f"campaign took {elapsed:.0f}s")
    verdict(9, f"mutation campaign ({elapsed:.1f}s)", problems)


def _cli_json(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        cli_main([str(a) for a in argv])
    return buf.getvalue().encode()


def test_criterion_10_determinism():
    problems = []
    check = ["check", corpus_path("vector_set"), corpus_path("slice"), "--format", "json", "--seed", "5",
             "--rate", "0.3"]
    if _cli_json(*check) != _cli_json(*check):
        problems.append("check reports differ")
    mutate = ["mutate", corpus_path("decrement"), "--format", "json", "--seed", "5", "--max-mutants", "4"]
    if _cli_json(*mutate) != _cli_json(*mutate):
        problems.append("mutate reports differ")
    verdict(10, "byte-identical JSON for identical seeds", problems)


if __name__ == "__main__":
    sys.exit(pytest.main(["-q", "-s", __file__]))
