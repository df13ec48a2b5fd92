"""Command-line front end: ``wyscheck check|enumerate|mutate``.

Every flag can also be set through an environment variable named
``WYSCHECK_<FLAG>`` (upper case, dashes as underscores), e.g.
``WYSCHECK_SEED=7`` or ``WYSCHECK_SCOPE=large``. Command-line flags win.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import Optional, Sequence

from .domains import DomainParams, UnsupportedType, build
from .harness import DEFAULT_SCOPE, SCOPES, TestConfig, format_json, format_text, header, run_all
from .interp import Interpreter, format_value
from .mutate import BaselineDirty, format_csv, run_campaign
from .mutate import format_json as mutation_json
from .syntax import SyntaxFault, load, parse_type_text
from .syntax.resolve import named_refs

ENV_PREFIX = "WYSCHECK_"
_PARAM_FLAGS = {
    "int_min": "int_min", "int_max": "int_max", "max_array": "max_array_len",
    "max_depth": "max_depth", "alias_width": "alias_width", "max_rotation": "max_rotation",
}


class CliError(Exception):
    pass


def _env(name: str, cast=str, default=None):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise CliError(f"bad value for {ENV_PREFIX}{name.upper()}: {raw!r}") from None


def _add_scope_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input domain")
    g.add_argument("--scope", choices=sorted(SCOPES), default=_env("scope", default=DEFAULT_SCOPE),
                   help=f"named parameter preset (default {DEFAULT_SCOPE})")
    g.add_argument("--int-min", type=int, default=_env("int_min", int))
    g.add_argument("--int-max", type=int, default=_env("int_max", int))
    g.add_argument("--max-array", type=int, default=_env("max_array", int), help="maximum array length")
    g.add_argument("--max-depth", type=int, default=_env("max_depth", int), help="recursive type depth")
    g.add_argument("--alias-width", type=int, default=_env("alias_width", int),
                   help="maximum distinct heap cells per reference group")
    g.add_argument("--max-rotation", type=int, default=_env("max_rotation", int),
                   help="largest lambda rotation")


def _add_run_flags(p: argparse.ArgumentParser, default_timeout: float) -> None:
    p.add_argument("files", nargs="+", help=".wys source files")
    _add_scope_flags(p)
    p.add_argument("--rate", type=float, default=_env("rate", float, 1.0), help="sampling rate in (0,1]")
    p.add_argument("--seed", type=int, default=_env("seed", int, 0))
    p.add_argument("--timeout", type=float, default=_env("timeout", float, default_timeout),
                   help="seconds per function (check) or per mutant (mutate); 0 disables")
    p.add_argument("--function", action="append", default=None, help="only test this function (repeatable)")
    p.add_argument("--skip", action="append", default=None, help="skip this function (default: main)")
    p.add_argument("--max-failures", type=int, default=_env("max_failures", int, 1),
                   help="counterexamples to collect per function")
    p.add_argument("--out", default=_env("out"), help="write the report here instead of stdout")
    p.add_argument("--timings", action="store_true", default=bool(_env("timings", int, 0)),
                   help="include elapsed times in reports")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wyscheck",
                                     description="Specification-based testing for .wys programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="test every function against its contract")
    _add_run_flags(check, 60.0)
    check.add_argument("--format", choices=["text", "json"], default=_env("format", default="text"))
    check.add_argument("--jobs", type=int, default=_env("jobs", int, os.cpu_count() or 1),
                       help="worker processes (default: available cores)")

    enum = sub.add_parser("enumerate", help="list the values of a type's domain")
    enum.add_argument("--type", required=True, help="type expression, e.g. 'bool[]' or a declared name")
    enum.add_argument("--file", help="source file declaring named types")
    enum.add_argument("--valid", action="store_true", help="only values satisfying type invariants")
    enum.add_argument("--limit", type=int, default=None, help="stop after this many lines")
    enum.add_argument("--out", default=_env("out"))
    _add_scope_flags(enum)

    mut = sub.add_parser("mutate", help="run a mutation campaign")
    _add_run_flags(mut, 60.0)
    mut.add_argument("--max-mutants", type=int, default=_env("max_mutants", int, 100))
    mut.add_argument("--format", choices=["text", "json", "csv"], default=_env("format", default="text"))
    return parser


def domain_params(args) -> DomainParams:
    base = SCOPES[args.scope]
    overrides = {field: getattr(args, flag) for flag, field in _PARAM_FLAGS.items()
                 if getattr(args, flag) is not None}
    try:
        return dataclasses.replace(base, **overrides)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def test_config(args) -> TestConfig:
    try:
        return TestConfig(
            params=domain_params(args),
            rate=args.rate,
            seed=args.seed,
            timeout=args.timeout if args.timeout and args.timeout > 0 else None,
            functions=tuple(args.function) if args.function else None,
            skip=tuple(args.skip) if args.skip is not None else ("main",),
            max_failures=args.max_failures,
            scope=args.scope,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check(args) -> int:
    config = test_config(args)
    programs = [load(path) for path in args.files]
    reports = [run_all(p, config, jobs=max(1, args.jobs)) for p in programs]
    if args.format == "json":
        _emit(format_json(reports, config, args.timings), args.out)
    else:
        _emit(format_text(reports, config, args.timings), args.out)
    return max([r.exit_code for r in reports] + [0])


def _enumerate(args) -> int:
    params = domain_params(args)
    program = load(args.file) if args.file else None
    t = parse_type_text(args.type)
    for ref in named_refs(t):
        if program is None:
            raise CliError(f"type {ref.name!r} needs --file")
        if ref.name not in program.types:
            raise CliError(f"unknown type {ref.name!r}")
    domain = build(t, params, program)
    checker = Interpreter(program) if args.valid and program is not None else None
    lines = []
    for i in range(domain.size):
        if args.limit is not None and len(lines) >= args.limit:
            break
        v = domain.at(i)
        if checker is not None and not checker.conforms(v, t):
            continue
        lines.append(f"{i}\t{format_value(v)}")
    _emit("".join(line + "\n" for line in lines), args.out)
    return 0


def _mutate(args) -> int:
    config = test_config(args)
    reports = []
    for path in args.files:
        program = load(path)
        reports.append(run_campaign(program, config, max_n=args.max_mutants, timeout=config.timeout))
    if args.format == "json":
        text = mutation_json(reports, config, args.timings)
    elif args.format == "csv":
        text = format_csv(reports, args.timings)
    else:
        text = header(config) + "\n" + "".join(r.to_text() for r in reports)
    _emit(text, args.out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        parser = make_parser()
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"wyscheck: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        if args.command == "check":
            return _check(args)
        if args.command == "enumerate":
            return _enumerate(args)
        return _mutate(args)
    except SyntaxFault as exc:
        print(exc.render(), file=sys.stderr)
        return 2
    except BaselineDirty as exc:
        print(f"wyscheck: {exc}", file=sys.stderr)
        return 2
    except (CliError, UnsupportedType, OSError) as exc:
        print(f"wyscheck: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
