"""Command line driver.

Four subcommands: ``learn`` induces rules from one scenario, ``run``
queries a rule program on an object term, ``chain`` learns scenarios in
sequence feeding each result to the next, ``check`` compares a rule
program against the built-in interpreter over a corpus.

Exit codes class outcomes, not commands: 0 success, 1 the search or
query came up empty (no hypothesis, finite failure, violations), 2 bad
input (unreadable file, parse or semantic error), 3 out of budget
(learner timeout, depth exceeded).
"""

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import Optional

from .corpus import builtin_corpus, builtin_corpus_names, load_corpus
from .learn import LearnResult, learn, learn_seq
from .objectlang import STRATEGIES, base_clauses, conformance_check, default_builtins
from .scenario import (
    Options,
    ScenarioError,
    ScenarioSpec,
    builtin_scenario,
    builtin_scenario_names,
    load_scenario,
)
from .solver import BuiltinError, SolveConfig, Verdict, solve
from .terms import Atom, Program, anon_var, symbol
from .textio import ParseError, parse_clauses, parse_term, print_clause, print_term

EX_OK = 0
EX_EMPTY = 1
EX_INPUT = 2
EX_BUDGET = 3

# human-readable verdicts; JSON carries the snake_case enum values
_VERDICT_TEXT = {
    Verdict.PROVED: "Proved",
    Verdict.FINITE_FAILURE: "FiniteFailure",
    Verdict.DEPTH_EXCEEDED: "DepthExceeded",
}

_STATUS_EXIT = {"found": EX_OK, "exhausted": EX_EMPTY, "timeout": EX_BUDGET}


class CliError(Exception):
    """Input problem the user can fix; maps to exit code 2."""


def _emit_json(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _read_scenario(ref: str) -> ScenarioSpec:
    if os.path.exists(ref):
        return load_scenario(ref)
    if ref in builtin_scenario_names():
        return builtin_scenario(ref)
    raise CliError(f"{ref}: no such file or bundled scenario "
                   f"(bundled: {', '.join(builtin_scenario_names())})")


def _read_program_file(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return parse_clauses(text)
    except ParseError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _read_corpus(ref: str):
    if os.path.exists(ref):
        try:
            return load_corpus(ref)
        except ParseError as exc:
            raise CliError(f"{ref}: {exc}") from exc
    if ref in builtin_corpus_names():
        return builtin_corpus(ref)
    raise CliError(f"{ref}: no such file or bundled corpus "
                   f"(bundled: {', '.join(builtin_corpus_names())})")


def _apply_overrides(spec: ScenarioSpec, args: argparse.Namespace) -> ScenarioSpec:
    opts = spec.options
    changed = Options(
        depth_limit=args.depth if args.depth is not None else opts.depth_limit,
        max_clauses=args.max_clauses if args.max_clauses is not None
        else opts.max_clauses,
        neg_depth_policy=opts.neg_depth_policy,
        timeout=args.timeout if args.timeout is not None else opts.timeout,
    )
    if changed == opts:
        return spec
    return replace(spec, options=changed)


def _trace_fn(enabled: bool):
    if not enabled:
        return None
    return lambda line: print(line, file=sys.stderr)


def _learn_payload(name: str, res: LearnResult) -> dict:
    payload = {
        "scenario": name,
        "status": res.status,
        "clauses": [print_clause(c) for c in res.hypothesis.clauses]
        if res.hypothesis else [],
        "size": res.hypothesis.size if res.hypothesis else 0,
        "stats": {
            "size_reached": res.stats.size_reached,
            "meta_steps": res.stats.meta_steps,
            "metasubs_tried": res.stats.metasubs_tried,
            "candidates": res.stats.candidates,
            "elapsed": round(res.stats.elapsed, 3),
        },
    }
    return payload


def cmd_learn(args: argparse.Namespace) -> int:
    spec = _apply_overrides(_read_scenario(args.scenario), args)
    res = learn(spec, trace=_trace_fn(args.trace))
    if args.json:
        payload = _learn_payload(spec.name, res)
        payload["command"] = "learn"
        payload["exit"] = _STATUS_EXIT[res.status]
        _emit_json(payload)
        return _STATUS_EXIT[res.status]
    if res.ok:
        print(f"% {spec.name}: {res.hypothesis.size} clauses, "
              f"{res.stats.elapsed:.2f}s, "
              f"{res.stats.metasubs_tried} metasubs tried")
        for c in res.hypothesis.clauses:
            print(print_clause(c))
    elif res.status == "exhausted":
        print(f"% {spec.name}: no hypothesis within "
              f"{spec.options.max_clauses} clauses", file=sys.stderr)
    else:
        print(f"% {spec.name}: timed out after "
              f"{res.stats.elapsed:.1f}s at size {res.stats.size_reached}",
              file=sys.stderr)
    return _STATUS_EXIT[res.status]


def cmd_run(args: argparse.Namespace) -> int:
    clauses = []
    if args.base != "none":
        clauses.extend(base_clauses(args.base))
    for path in args.programs:
        clauses.extend(_read_program_file(path))
    if not clauses:
        raise CliError("no rules: give program files or drop --base none")
    text = sys.stdin.read() if args.term == "-" else args.term
    try:
        term = parse_term(text)
    except ParseError as exc:
        raise CliError(f"term: {exc}") from exc
    result = anon_var()
    goal = Atom(symbol("eval", 2), (term, result))
    try:
        out = solve(Program(tuple(clauses)), goal,
                    SolveConfig(depth_limit=args.depth
                                if args.depth is not None else 300),
                    default_builtins())
    except BuiltinError as exc:
        raise CliError(str(exc)) from exc
    value = None
    if out.verdict is Verdict.PROVED and result.id in out.answer:
        value = print_term(out.answer[result.id])
    code = {Verdict.PROVED: EX_OK,
            Verdict.FINITE_FAILURE: EX_EMPTY,
            Verdict.DEPTH_EXCEEDED: EX_BUDGET}[out.verdict]
    if args.json:
        _emit_json({
            "command": "run",
            "term": print_term(term),
            "verdict": str(out.verdict),
            "value": value,
            "steps": out.steps,
            "exit": code,
        })
        return code
    if value is not None:
        print(value)
    else:
        print(_VERDICT_TEXT[out.verdict])
    return code


def cmd_chain(args: argparse.Namespace) -> int:
    specs = [_apply_overrides(_read_scenario(ref), args)
             for ref in args.scenarios]
    seq = learn_seq(specs, trace=_trace_fn(args.trace))
    failed: Optional[int] = None
    for i, (_, res) in enumerate(seq.results):
        if not res.ok:
            failed = i
    code = EX_OK if seq.ok else _STATUS_EXIT[seq.results[-1][1].status]
    combined_text = None
    if seq.combined is not None:
        combined_text = "".join(print_clause(c) + "\n"
                                for c in seq.combined.clauses)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(combined_text)
    if args.json:
        _emit_json({
            "command": "chain",
            "tasks": [dict(_learn_payload(name, res)) for name, res in seq.results],
            "induced": [print_clause(c) for c in seq.induced],
            "combined_size": len(seq.combined.clauses) if seq.combined else 0,
            "failed_task": failed,
            "elapsed": round(seq.elapsed, 3),
            "exit": code,
        })
        return code
    for name, res in seq.results:
        mark = "ok" if res.ok else res.status
        size = res.hypothesis.size if res.hypothesis else 0
        print(f"% {name}: {mark}, {size} clauses, {res.stats.elapsed:.2f}s",
              file=sys.stderr if not res.ok else sys.stdout)
    if seq.ok:
        print(f"% chain: {len(seq.induced)} induced clauses, "
              f"{seq.elapsed:.2f}s total")
        if args.out:
            print(f"% combined program written to {args.out}")
        else:
            print(combined_text, end="")
    else:
        print(f"% chain: stopped at task {failed} "
              f"({seq.results[failed][0]})", file=sys.stderr)
    return code


def cmd_check(args: argparse.Namespace) -> int:
    clauses = []
    if args.base != "none":
        clauses.extend(base_clauses(args.base))
    clauses.extend(_read_program_file(args.program))
    terms = _read_corpus(args.corpus)
    report = conformance_check(
        Program(tuple(clauses)), terms,
        strategy=args.strategy,
        depth_limit=args.depth if args.depth is not None else 300,
        fuel=args.fuel)
    empty = report.total == 0
    code = EX_OK if (report.ok or empty) else EX_EMPTY
    if args.json:
        _emit_json({
            "command": "check",
            "strategy": args.strategy,
            "total": report.total,
            "passed": report.passed,
            "failures": list(report.failures),
            "exit": code,
        })
        return code
    print(f"% {report.passed}/{report.total} terms conform "
          f"({args.strategy})")
    for line in report.failures:
        print(f"  {line}")
    return code


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="milsem",
        description="learn and test small-step evaluation rules")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, timeout=False, clauses=False):
        p.add_argument("--depth", type=int, default=None, metavar="N",
                       help="proof depth limit")
        if clauses:
            p.add_argument("--max-clauses", type=int, default=None,
                           metavar="N", help="hypothesis size cap")
        if timeout:
            p.add_argument("--timeout", type=float, default=None,
                           metavar="S", help="search budget in seconds")
        p.add_argument("--json", action="store_true",
                       help="machine-readable output")

    p = sub.add_parser("learn", help="induce rules from one scenario")
    p.add_argument("scenario", help="scenario file or bundled name")
    common(p, timeout=True, clauses=True)
    p.add_argument("--trace", action="store_true",
                   help="log the search to stderr")
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("run", help="evaluate a term with a rule program")
    p.add_argument("term", help="object term, or - for stdin")
    p.add_argument("-p", "--program", dest="programs", action="append",
                   default=[], metavar="FILE",
                   help="clause file to load; repeatable")
    p.add_argument("--base", choices=["full", "lazy", "eager", "none"],
                   default="full",
                   help="built-in rules to include (default full)")
    common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("chain", help="learn scenarios in sequence")
    p.add_argument("scenarios", nargs="+", metavar="SCENARIO",
                   help="scenario files or bundled names, in order")
    p.add_argument("--out", metavar="FILE",
                   help="write the combined program here")
    common(p, timeout=True, clauses=True)
    p.add_argument("--trace", action="store_true",
                   help="log the search to stderr")
    p.set_defaults(fn=cmd_chain)

    p = sub.add_parser("check", help="compare rules with the interpreter")
    p.add_argument("program", help="clause file")
    p.add_argument("corpus", help="term file or bundled name")
    p.add_argument("--strategy", choices=list(STRATEGIES), default="lazy",
                   help="interpreter strategy (default lazy)")
    p.add_argument("--fuel", type=int, default=1000, metavar="N",
                   help="interpreter step budget per term")
    p.add_argument("--base", choices=["full", "lazy", "eager", "none"],
                   default="none",
                   help="built-in rules to prepend (default none)")
    common(p)
    p.set_defaults(fn=cmd_check)
    return top


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, ScenarioError, ParseError, BuiltinError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INPUT


if __name__ == "__main__":
    sys.exit(main())
