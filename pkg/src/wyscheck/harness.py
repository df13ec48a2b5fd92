"""Generate inputs, filter them through contracts, run, and collect counterexamples."""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import __version__
from .domains import DomainParams, UnsupportedType, build_inputs
from .interp import Budget, Fault, FaultKind, Heap, Interpreter, format_trace, format_value, run_deep, to_json
from .sampler import select, target_count
from .syntax import ast as A
from .syntax import compile_text
from .syntax.resolve import Program

SCOPES: Dict[str, DomainParams] = {
    "tiny": DomainParams(0, 0, 0, 0, 0, 0),
    "small": DomainParams(-1, 1, 1, 1, 1, 1),
    "medium": DomainParams(-2, 2, 2, 2, 2, 2),
    "large": DomainParams(-3, 3, 3, 3, 3, 3),
    "huge": DomainParams(-4, 4, 4, 4, 4, 4),
}
DEFAULT_SCOPE = "medium"
SCHEMA = 1


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class

    params: DomainParams = SCOPES[DEFAULT_SCOPE]
    rate: float = 1.0
    seed: int = 0
    timeout: Optional[float] = 60.0
    functions: Optional[Tuple[str, ...]] = None
    skip: Tuple[str, ...] = ("main",)
    max_failures: int = 1
    max_call_depth: int = 512
    scope: Optional[str] = DEFAULT_SCOPE
    record_indices: bool = False

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"rate must be in (0, 1], got {self.rate}")
        if self.max_failures < 1:
            raise ValueError("max_failures must be at least 1")

    @classmethod
    def for_scope(cls, scope: str = DEFAULT_SCOPE, **overrides) -> "TestConfig":
        return cls(params=SCOPES[scope], scope=scope, **overrides)

    def selects(self, decl: A.FunctionDecl) -> bool:
        if decl.name in self.skip:
            return False
        return self.functions is None or decl.name in self.functions

    def echo(self) -> Dict:
        p = self.params
        return {
            "scope": self.scope,
            "params": {
                "int_min": p.int_min, "int_max": p.int_max, "max_array_len": p.max_array_len,
                "max_depth": p.max_depth, "alias_width": p.alias_width, "max_rotation": p.max_rotation,
            },
            "rate": self.rate,
            "seed": self.seed,
            "timeout": self.timeout,
            "max_failures": self.max_failures,
        }


def sub_seed(seed: int, decl: A.FunctionDecl) -> int:
    """Per-function seed so results do not depend on which other functions run."""
    digest = hashlib.sha256(f"{seed}\0{decl.signature}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class Failure:
    fault: Fault
    args: Tuple
    heap: Heap
    index: int

    @property
    def kind(self) -> FaultKind:
        return self.fault.kind

    def call_text(self, name: str) -> str:
        return f"{name}({','.join(format_value(a) for a in self.args)})"

    def to_dict(self, sources: Mapping[str, str]) -> Dict:
        out = self.fault.to_dict(sources)
        out["index"] = self.index
        out["args"] = [to_json(a) for a in self.args]
        out["args_text"] = [format_value(a) for a in self.args]
        out["heap"] = self.heap.literal()
        return out


@dataclass
class FunctionResult:
    name: str
    signature: str
    kind: str
    domain_size: int = 0
    planned: int = 0
    sampled: int = 0
    meaningless: int = 0
    executed: int = 0
    inconclusive: int = 0
    failures: List[Failure] = field(default_factory=list)
    elapsed: float = 0.0
    timed_out: bool = False
    truncated: bool = False
    note: Optional[str] = None
    error: Optional[str] = None
    indices: Optional[List[int]] = None  # filled when config.record_indices

    @property
    def passed(self) -> bool:
        return not self.failures and self.error is None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "ERROR"
        if self.failures:
            return "FAIL"
        if self.timed_out:
            return "TIMEOUT"
        return "PASS"

    def to_dict(self, sources: Mapping[str, str], timings: bool = False) -> Dict:
        out = {
            "name": self.name,
            "signature": self.signature,
            "kind": self.kind,
            "status": self.status,
            "domain_size": str(self.domain_size) if self.domain_size > 2 ** 53 else self.domain_size,
            "planned": self.planned,
            "sampled": self.sampled,
            "meaningless": self.meaningless,
            "executed": self.executed,
            "inconclusive": self.inconclusive,
            "timed_out": self.timed_out,
            "truncated": self.truncated,
            "note": self.note,
            "error": self.error,
            "failures": [f.to_dict(sources) for f in self.failures],
        }
        if timings:
            out["elapsed"] = round(self.elapsed, 6)
        return out


@dataclass
class TestReport:
    __test__ = False

    path: str
    config: TestConfig
    results: List[FunctionResult]
    sources: Dict[str, str] = field(default_factory=dict)

    @property
    def failed(self) -> List[FunctionResult]:
        return [r for r in self.results if r.failures]

    @property
    def errors(self) -> List[FunctionResult]:
        return [r for r in self.results if r.error is not None]

    @property
    def exit_code(self) -> int:
        if self.errors:
            return 2
        return 1 if self.failed else 0

    def totals(self) -> Dict:
        return {
            "functions": len(self.results),
            "passed": sum(r.status == "PASS" for r in self.results),
            "failed": len(self.failed),
            "timed_out": sum(r.timed_out for r in self.results),
            "errors": len(self.errors),
            "executed": sum(r.executed for r in self.results),
            "meaningless": sum(r.meaningless for r in self.results),
            "inconclusive": sum(r.inconclusive for r in self.results),
        }

    def to_dict(self, timings: bool = False) -> Dict:
        return {
            "path": self.path,
            "functions": [r.to_dict(self.sources, timings) for r in self.results],
            "totals": self.totals(),
        }


def header(config: TestConfig) -> str:
    p = config.params
    scope = f"scope={config.scope} " if config.scope else ""
    timeout = "none" if config.timeout is None else f"{config.timeout:g}s"
    return (f"wyscheck {__version__} seed={config.seed} {scope}"
            f"int={p.int_min}..{p.int_max} max_array={p.max_array_len} max_depth={p.max_depth} "
            f"alias_width={p.alias_width} max_rotation={p.max_rotation} "
            f"rate={config.rate:g} timeout={timeout}")


def format_text(reports: Sequence[TestReport], config: TestConfig, timings: bool = False) -> str:
    lines = [header(config)]
    for report in reports:
        lines.append(f"{report.path}:")
        if not report.results:
            lines.append("  (no functions to test)")
        for r in report.results:
            counts = (f"domain={r.domain_size} sampled={r.sampled} executed={r.executed} "
                      f"meaningless={r.meaningless} inconclusive={r.inconclusive}")
            if timings:
                counts += f" elapsed={r.elapsed:.3f}s"
            lines.append(f"  {r.status:<7} {r.signature}  {counts}")
            if r.timed_out:
                lines.append("    timed out before all inputs were tried")
            if r.note:
                lines.append(f"    note: {r.note}")
            if r.error:
                lines.append(f"    error: {r.error}")
            for f in r.failures:
                lines.append(f"    counterexample: {f.call_text(r.name)}"
                             + (f" with heap {f.heap.literal()}" if len(f.heap) else ""))
                for t in format_trace(f.fault, report.sources).split("\n"):
                    lines.append(f"      {t}")
    t = _sum_totals(reports)
    lines.append(f"summary: {t['functions']} function(s), {t['passed']} passed, {t['failed']} failed, "
                 f"{t['timed_out']} timed out, {t['errors']} error(s)")
    return "\n".join(lines) + "\n"


def _sum_totals(reports: Sequence[TestReport]) -> Dict:
    out: Dict[str, int] = {}
    for rep in reports:
        for k, v in rep.totals().items():
            out[k] = out.get(k, 0) + v
    return out or {k: 0 for k in ("functions", "passed", "failed", "timed_out", "errors")}


def format_json(reports: Sequence[TestReport], config: TestConfig, timings: bool = False) -> str:
    doc = {
        "schema": SCHEMA,
        "tool": f"wyscheck {__version__}",
        "config": config.echo(),
        "files": [r.to_dict(timings) for r in reports],
        "totals": _sum_totals(reports),
    }
    return json.dumps(doc, indent=2) + "\n"


def run_function(decl: A.FunctionDecl, program: Program, config: TestConfig,
                 cache: Optional[dict] = None, deadline: Optional[float] = None) -> FunctionResult:
    """Test one declaration over its sampled input domain.

    ``deadline`` (a ``time.monotonic`` instant) caps the run in addition to
    ``config.timeout``.
    """
    return run_deep(_run_function, decl, program, config, cache, deadline)


def _run_function(decl, program, config, cache, deadline) -> FunctionResult:
    start = time.perf_counter()
    result = FunctionResult(decl.name, decl.signature, decl.kind)
    if config.timeout is not None:
        own = time.monotonic() + config.timeout
        deadline = own if deadline is None else min(deadline, own)
    try:
        domain = build_inputs(decl, config.params, program)
    except UnsupportedType as exc:
        result.error = str(exc)
        result.elapsed = time.perf_counter() - start
        return result
    result.domain_size = domain.size
    if domain.size == 0:
        result.note = "no inputs generated"
        result.elapsed = time.perf_counter() - start
        return result
    result.planned = target_count(domain.size, config.rate)
    budget = Budget(deadline, config.max_call_depth)
    interp = Interpreter(program, cache)
    if config.record_indices:
        result.indices = []
    for index in select(domain.size, result.planned, sub_seed(config.seed, decl)):
        if deadline is not None and time.monotonic() > deadline:
            result.timed_out = True
            break
        args, heap = domain.decode(index)
        initial = heap.copy()
        if result.indices is not None:
            result.indices.append(index)
        try:
            if not interp.admit(decl, args, heap, budget):
                result.meaningless += 1
                result.sampled += 1
                continue
            interp.call(decl, args, heap, budget, check_entry=False)
            result.executed += 1
        except Fault as fault:
            if fault.kind is FaultKind.Timeout:
                result.timed_out = True
                break
            if fault.kind is FaultKind.LambdaDomainExhausted:
                result.inconclusive += 1
                result.sampled += 1
                continue
            result.executed += 1
            result.failures.append(Failure(fault, args, initial, index))
        result.sampled += 1
        if len(result.failures) >= config.max_failures:
            result.truncated = result.sampled < result.planned
            break
    result.elapsed = time.perf_counter() - start
    return result


def run_all(program: Program, config: TestConfig, deadline: Optional[float] = None,
            jobs: int = 1) -> TestReport:
    """Test every selected declaration in declaration order."""
    decls = [d for d in program.callables if config.selects(d)]
    if jobs > 1 and len(decls) > 1:
        results = _run_parallel(program, decls, config, deadline, jobs)
    else:
        cache: dict = {}
        results = [run_function(d, program, config, cache, deadline) for d in decls]
    return TestReport(program.source.path, config, results, program.sources)


def _worker(text: str, path: str, position: int, config: TestConfig,
            deadline_in: Optional[float]) -> FunctionResult:
    program = compile_text(text, path)
    decl = program.callables[position]
    deadline = None if deadline_in is None else time.monotonic() + deadline_in
    return run_function(decl, program, config, None, deadline)


def _run_parallel(program, decls, config, deadline, jobs) -> List[FunctionResult]:
    callables = program.callables
    positions = [next(i for i, c in enumerate(callables) if c is d) for d in decls]
    remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_worker, program.source.text, program.source.path, pos, config, remaining)
                   for pos in positions]
        return [f.result() for f in futures]
