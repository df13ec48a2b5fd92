"""Single-site mutation campaigns."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from .harness import SCHEMA, Failure, TestConfig, run_all
from .interp import format_trace
from .sampler import select
from .syntax import ast as A
from .syntax import SyntaxFault, compile_text, pretty
from .syntax.resolve import Program

SWAPS = {
    "==": "!=", "!=": "==",
    "<": ">=", ">=": "<",
    "<=": ">", ">": "<=",
    "&&": "||", "||": "&&",
}
QUANTIFIER_SWAPS = {"all": "some", "some": "all"}

Path = Tuple[Any, ...]


@dataclass(frozen=True)
class MutationSite:
    """One syntactic change: ``node`` at ``path`` is replaced by ``replacement``."""

    path: Path
    span: Optional[A.Span]
    operator: str
    original: str
    replacement: str
    node: Any = field(compare=False, repr=False)
    new_node: Any = field(compare=False, repr=False)

    @property
    def location(self) -> str:
        if self.span is None:
            return "?"
        return f"{self.span.line}:{self.span.col}"

    def describe(self) -> str:
        return f"{self.location} {self.original} -> {self.replacement}"


class BaselineDirty(Exception):
    """The unmutated program already fails, so detection would be meaningless."""

    def __init__(self, failures: Sequence[str]):
        self.failures = list(failures)
        super().__init__("baseline program has failures: " + "; ".join(self.failures))


def _walk(node: Any, path: Path) -> Iterator[Tuple[Path, Any]]:
    yield path, node
    if not is_dataclass(node) or isinstance(node, A.Span):
        return
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, tuple):
            for i, item in enumerate(value):
                if is_dataclass(item) and not isinstance(item, A.Span):
                    yield from _walk(item, path + (f.name, i))
                elif isinstance(item, tuple):
                    # (name, expr) pairs in record literals
                    for j, sub in enumerate(item):
                        if is_dataclass(sub) and not isinstance(sub, A.Span):
                            yield from _walk(sub, path + (f.name, i, j))
        elif is_dataclass(value) and not isinstance(value, A.Span):
            yield from _walk(value, path + (f.name,))


_TYPES = (A.NullType, A.BoolType, A.IntType, A.ArrayType, A.RecordType, A.UnionType,
          A.NamedType, A.RefType, A.LambdaType)


def _key(site: MutationSite) -> Tuple:
    s = site.span
    pos = (s.line, s.col) if s is not None else (0, 0)
    return pos + (site.operator, site.replacement)


def enumerate_sites(program: Program) -> List[MutationSite]:
    """Every single-site mutation, in source order."""
    sites: List[MutationSite] = []
    for di, decl in enumerate(program.source.decls):
        for path, node in _walk(decl, ("decls", di)):
            if isinstance(node, _TYPES):
                continue
            if isinstance(node, A.Binary) and node.op in SWAPS:
                new_op = SWAPS[node.op]
                sites.append(MutationSite(path, node.op_span or node.span, "swap-operator",
                                          node.op, new_op, node, replace(node, op=new_op)))
            elif isinstance(node, A.IntLit):
                for delta, label in ((1, "increment-constant"), (-1, "decrement-constant")):
                    sites.append(MutationSite(path, node.span, label, str(node.value),
                                              str(node.value + delta), node,
                                              replace(node, value=node.value + delta)))
            elif isinstance(node, A.BoolLit):
                flipped = not node.value
                sites.append(MutationSite(path, node.span, "flip-boolean", str(node.value).lower(),
                                          str(flipped).lower(), node, replace(node, value=flipped)))
            elif isinstance(node, A.Quantifier):
                new_kind = QUANTIFIER_SWAPS[node.kind]
                sites.append(MutationSite(path, node.kw_span or node.span, "swap-quantifier",
                                          node.kind, new_kind, node, replace(node, kind=new_kind)))
    sites.sort(key=_key)
    return sites


def _replace_at(node: Any, path: Path, new: Any) -> Any:
    if not path:
        return new
    head = path[0]
    value = getattr(node, head)
    if isinstance(value, tuple):
        i = path[1]
        item = value[i]
        if isinstance(item, tuple) and not is_dataclass(item):
            j = path[2]
            inner = list(item)
            inner[j] = _replace_at(item[j], path[3:], new)
            rebuilt = tuple(inner)
        else:
            rebuilt = _replace_at(item, path[2:], new)
        items = list(value)
        items[i] = rebuilt
        return replace(node, **{head: tuple(items)})
    return replace(node, **{head: _replace_at(value, path[1:], new)})


def apply(program: Program, site: MutationSite) -> Program:
    """The program with ``site`` applied, re-printed and re-parsed."""
    source = program.source
    _, di = site.path[:2]
    decls = list(source.decls)
    decls[di] = _replace_at(decls[di], site.path[2:], site.new_node)
    text = pretty(replace(source, decls=tuple(decls)))
    return compile_text(text, source.path)


def sample_mutants(sites: Sequence[MutationSite], max_n: int, seed: int) -> List[MutationSite]:
    """Uniform sample of min(max_n, |sites|) sites without replacement, in source order."""
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    return [sites[i] for i in select(len(sites), min(max_n, len(sites)), seed)]


@dataclass
class MutantOutcome:
    id: int
    site: MutationSite
    outcome: str  # detected | undetected | timeout | invalid
    fault_kind: Optional[str] = None
    function: Optional[str] = None
    counterexample: Optional[str] = None
    trace: Optional[str] = None
    elapsed: float = 0.0
    failure: Optional[Failure] = field(default=None, repr=False)
    program: Optional[Program] = field(default=None, repr=False)

    def row(self, timings: bool) -> Dict:
        out = {
            "mutant": self.id,
            "span": self.site.location,
            "operator": self.site.operator,
            "original": self.site.original,
            "replacement": self.site.replacement,
            "outcome": self.outcome,
            "fault_kind": self.fault_kind or "",
        }
        if timings:
            out["elapsed"] = f"{self.elapsed:.3f}"
        return out


@dataclass
class MutationReport:
    path: str
    config: TestConfig
    total_sites: int
    outcomes: List[MutantOutcome]
    mutant_timeout: Optional[float] = None

    @property
    def sampled(self) -> int:
        return len(self.outcomes)

    def count(self, outcome: str) -> int:
        return sum(o.outcome == outcome for o in self.outcomes)

    @property
    def detected(self) -> int:
        return self.count("detected")

    @property
    def percentage(self) -> float:
        return 100.0 * self.detected / self.sampled if self.sampled else 0.0

    def summary(self) -> Dict:
        return {
            "total_sites": self.total_sites,
            "sampled": self.sampled,
            "detected": self.detected,
            "undetected": self.count("undetected"),
            "timeout": self.count("timeout"),
            "invalid": self.count("invalid"),
            "detection_percentage": round(self.percentage, 2),
        }

    def to_dict(self, timings: bool = False) -> Dict:
        mutants = []
        for o in self.outcomes:
            row = o.row(timings)
            row.update({"function": o.function, "counterexample": o.counterexample, "trace": o.trace})
            mutants.append(row)
        return {"path": self.path, "summary": self.summary(), "mutants": mutants}

    def to_csv(self, timings: bool = False) -> str:
        cols = ["mutant", "span", "operator", "original", "replacement", "outcome", "fault_kind"]
        if timings:
            cols.append("elapsed")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for o in self.outcomes:
            writer.writerow(o.row(timings))
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{self.path}:"]
        for o in self.outcomes:
            kind = f" ({o.fault_kind})" if o.fault_kind else ""
            lines.append(f"  #{o.id:<4} {o.site.describe():<40} {o.outcome}{kind}")
        s = self.summary()
        lines.append(f"  {s['detected']}/{s['sampled']} mutants detected ({s['detection_percentage']:.1f}%), "
                     f"{s['undetected']} undetected, {s['timeout']} timed out, "
                     f"{s['total_sites']} sites in total")
        return "\n".join(lines) + "\n"


def format_json(reports: Sequence[MutationReport], config: TestConfig, timings: bool = False) -> str:
    doc = {"schema": SCHEMA, "config": config.echo(), "campaigns": [r.to_dict(timings) for r in reports]}
    return json.dumps(doc, indent=2) + "\n"


def format_csv(reports: Sequence[MutationReport], timings: bool = False) -> str:
    parts = []
    for i, r in enumerate(reports):
        text = r.to_csv(timings)
        if len(reports) > 1:
            text = "\n".join(f"{r.path},{line}" if j else f"file,{line}"
                             for j, line in enumerate(text.rstrip("\n").split("\n"))) + "\n"
        parts.append(text if i == 0 else text.split("\n", 1)[1])
    return "".join(parts)


def run_mutant(mutant: Program, config: TestConfig, timeout: Optional[float]) -> Dict:
    """Test one mutant; the first failure found decides detection."""
    deadline = None if timeout is None else time.monotonic() + timeout
    report = run_all(mutant, config, deadline=deadline)
    for r in report.results:
        if r.failures:
            f = r.failures[0]
            return {"outcome": "detected", "fault_kind": f.kind.name, "function": r.signature,
                    "counterexample": f.call_text(r.name), "trace": format_trace(f.fault, report.sources),
                    "failure": f, "program": mutant}
    if any(r.timed_out for r in report.results):
        return {"outcome": "timeout", "program": mutant}
    return {"outcome": "undetected", "program": mutant}


def run_campaign(program: Program, config: TestConfig, max_n: int = 100,
                 timeout: Optional[float] = None, sites: Optional[Sequence[MutationSite]] = None) -> MutationReport:
    """Mutate, test each mutant, and tally detections.

    ``timeout`` bounds each mutant's whole run (default: ``config.timeout``).
    Raises :class:`BaselineDirty` when the unmutated program already fails.
    """
    if timeout is None:
        timeout = config.timeout
    baseline = run_all(program, config)
    if baseline.failed:
        raise BaselineDirty([f"{r.signature}: {r.failures[0].kind.name}" for r in baseline.failed])
    all_sites = enumerate_sites(program)
    chosen = list(sites) if sites is not None else sample_mutants(all_sites, max_n, config.seed)
    outcomes = []
    for n, site in enumerate(chosen, start=1):
        start = time.perf_counter()
        try:
            mutant = apply(program, site)
        except SyntaxFault:
            outcomes.append(MutantOutcome(n, site, "invalid", elapsed=time.perf_counter() - start))
            continue
        found = run_mutant(mutant, config, timeout)
        outcomes.append(MutantOutcome(n, site, elapsed=time.perf_counter() - start, **found))
    return MutationReport(program.source.path, config, len(all_sites), outcomes, timeout)
