"""Learning scenarios: background knowledge, metarules, pools and examples.

A scenario file is plain text divided by ``%% <section>`` headers:

    %% background     clauses, and builtin predicates used by them
    %% metarules      metarule(...) declarations
    %% head           predicates the learner may put in rule heads, p/n.
    %% body           auxiliary predicates allowed in rule bodies, p/n.
    %% functions      object-level constructors available to metarules, f/n.
    %% examples       pos(G). / neg(G). / nonterm(G).
    %% options        depth_limit(N). max_clauses(N). neg_depth_policy(P).
                      timeout(Seconds).

``background``, ``metarules``, ``head`` and ``examples`` are required.
The function pool is the declared set plus any functor that occurs in an
example goal but nowhere in the background program, so files only need to
spell out constructors the examples cannot reveal.  Arity-0 functions
double as constants; integer literals in examples join the constant pool.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .metarules import Metarule, Pools
from .terms import Atom, Clause, Compound, Int, Symbol, Term, symbol
from .textio import (
    ParseError,
    _Parser,
    parse_clauses,
    parse_metarules,
    print_atom,
    print_clause,
    print_metarule,
    print_symbol,
)

EXAMPLE_TAGS = ("pos", "neg", "nonterm")

_SECTIONS = ("background", "metarules", "head", "body", "functions",
             "examples", "options")
_REQUIRED = ("background", "metarules", "head", "examples")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Example:
    tag: str  # pos | neg | nonterm
    goal: Atom

    def __str__(self) -> str:
        return f"{self.tag}({print_atom(self.goal)})."


@dataclass(frozen=True, slots=True)
class Options:
    depth_limit: int = 300
    max_clauses: int = 10
    neg_depth_policy: str = "reject"  # reject | accept
    timeout: float = 120.0


@dataclass(frozen=True, slots=True)
class ScenarioSpec:
    name: str
    bk: tuple[Clause, ...]
    metarules: tuple[Metarule, ...]
    head_preds: tuple[Symbol, ...]
    body_preds: tuple[Symbol, ...] = ()
    func_decls: tuple[Symbol, ...] = ()
    examples: tuple[Example, ...] = ()
    options: Options = field(default_factory=Options)

    def positives(self) -> list[Example]:
        return [e for e in self.examples if e.tag == "pos"]

    def negatives(self) -> list[Example]:
        return [e for e in self.examples if e.tag == "neg"]

    def nonterminating(self) -> list[Example]:
        return [e for e in self.examples if e.tag == "nonterm"]

    def func_pool(self) -> tuple[Symbol, ...]:
        """Declared constructors first, then example-goal functors absent
        from the background, in order of first appearance."""
        bk_funcs = _program_functors(self.bk)
        pool: dict[Symbol, None] = dict.fromkeys(self.func_decls)
        for e in self.examples:
            for t in e.goal.args:
                for f in _term_functors(t):
                    if f not in bk_funcs and f not in pool:
                        pool[f] = None
        return tuple(pool)

    def const_pool(self) -> tuple:
        consts: dict = dict.fromkeys(f for f in self.func_pool() if f.arity == 0)
        for e in self.examples:
            for t in e.goal.args:
                for n in _term_ints(t):
                    consts.setdefault(n)
        return tuple(consts)

    def pools(self) -> Pools:
        return Pools(
            head_preds=tuple(self.head_preds),
            body_preds=tuple(self.body_preds),
            funcs=self.func_pool(),
            consts=self.const_pool(),
        )

    def with_examples(self, examples: Iterable[Example]) -> "ScenarioSpec":
        return replace(self, examples=tuple(examples))


def _term_functors(t: Term) -> list[Symbol]:
    """Functors in pre-order, first occurrence only."""
    out: dict[Symbol, None] = {}
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Compound):
            out.setdefault(x.functor)
            stack.extend(reversed(x.args))
    return list(out)


def _term_ints(t: Term) -> list[int]:
    out: dict[int, None] = {}
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Int):
            out.setdefault(x.value)
        elif isinstance(x, Compound):
            stack.extend(reversed(x.args))
    return list(out)


def _program_functors(clauses: Iterable[Clause]) -> set[Symbol]:
    out: set[Symbol] = set()
    for c in clauses:
        for a in (c.head, *c.body):
            for t in a.args:
                out.update(_term_functors(t))
    return out


# ============================================================
# Parsing
# ============================================================


def _split_sections(text: str) -> dict[str, str]:
    """Break the file at ``%%`` headers, padding each part with newlines so
    parse errors report positions in the original file."""
    sections: dict[str, str] = {}
    current: Optional[str] = None
    lines: list[str] = []
    pad = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("%%"):
            if current is not None:
                sections[current] = "\n" * pad + "\n".join(lines)
            name = stripped[2:].strip()
            if name not in _SECTIONS:
                raise ScenarioError(
                    f"unknown section {name!r} at line {lineno}; "
                    f"expected one of {', '.join(_SECTIONS)}")
            if name in sections or name == current:
                raise ScenarioError(f"duplicate section {name!r} at line {lineno}")
            current = name
            lines = []
            pad = lineno
            continue
        if current is None:
            if stripped and not stripped.startswith("%"):
                raise ScenarioError(
                    f"content before the first %% section at line {lineno}")
            continue
        lines.append(line)
    if current is not None:
        sections[current] = "\n" * pad + "\n".join(lines)
    for name in _REQUIRED:
        if name not in sections:
            raise ScenarioError(f"missing required section {name!r}")
    return sections


def _parse_examples(text: str) -> list[Example]:
    p = _Parser(text)
    out: list[Example] = []
    while not p.at("EOF"):
        tok = p.peek()
        a = p.atom()
        p.expect("DOT", ".")
        if a.pred.name not in EXAMPLE_TAGS or a.pred.arity != 1:
            raise ScenarioError(
                f"example at line {tok.line} must be pos(G), neg(G) or "
                f"nonterm(G), got {a.pred.name}/{a.pred.arity}")
        inner = a.args[0]
        if not isinstance(inner, Compound) or inner.functor.arity == 0:
            raise ScenarioError(
                f"example goal at line {tok.line} must be a compound atom")
        out.append(Example(a.pred.name, Atom(inner.functor, inner.args)))
    return out


def _parse_options(text: str) -> Options:
    p = _Parser(text)
    opts = Options()
    while not p.at("EOF"):
        tok = p.peek()
        a = p.atom()
        p.expect("DOT", ".")
        if a.pred.arity != 1:
            raise ScenarioError(f"malformed option at line {tok.line}")
        arg = a.args[0]
        name = a.pred.name
        if name in ("depth_limit", "max_clauses", "timeout"):
            if not isinstance(arg, Int) or arg.value <= 0:
                raise ScenarioError(
                    f"{name} at line {tok.line} needs a positive integer")
            if name == "depth_limit":
                opts = replace(opts, depth_limit=arg.value)
            elif name == "max_clauses":
                opts = replace(opts, max_clauses=arg.value)
            else:
                opts = replace(opts, timeout=float(arg.value))
        elif name == "neg_depth_policy":
            if not (isinstance(arg, Compound) and arg.functor.arity == 0
                    and arg.functor.name in ("reject", "accept")):
                raise ScenarioError(
                    f"neg_depth_policy at line {tok.line} must be reject or accept")
            opts = replace(opts, neg_depth_policy=arg.functor.name)
        else:
            raise ScenarioError(f"unknown option {name!r} at line {tok.line}")
    return opts


def _parse_symbol_list(text: str, *, what: str) -> tuple[Symbol, ...]:
    p = _Parser(text)
    out: list[Symbol] = []
    while not p.at("EOF"):
        tok = p.peek()
        s = p.symbol_decl()
        if s in out:
            raise ScenarioError(f"duplicate {what} {s.name}/{s.arity} at line {tok.line}")
        out.append(s)
    return tuple(out)


def parse_scenario(text: str, name: str = "scenario") -> ScenarioSpec:
    sections = _split_sections(text)
    bk = tuple(parse_clauses(sections["background"]))
    metarules = tuple(parse_metarules(sections["metarules"]))
    if not metarules:
        raise ScenarioError("metarules section is empty")
    head = _parse_symbol_list(sections["head"], what="head predicate")
    if not head:
        raise ScenarioError("head section is empty")
    body = _parse_symbol_list(sections.get("body", ""), what="body predicate")
    funcs = _parse_symbol_list(sections.get("functions", ""), what="function")
    examples = tuple(_parse_examples(sections["examples"]))
    if not any(e.tag == "pos" for e in examples):
        raise ScenarioError("examples section has no positive example")
    options = _parse_options(sections.get("options", ""))

    spec = ScenarioSpec(name=name, bk=bk, metarules=metarules,
                        head_preds=head, body_preds=body, func_decls=funcs,
                        examples=examples, options=options)
    _validate(spec)
    return spec


def _validate(spec: ScenarioSpec) -> None:
    for s in spec.head_preds:
        if s.arity == 0:
            raise ScenarioError(f"head predicate {s.name} must take arguments")
    known = {c.head.pred for c in spec.bk}
    known.update(spec.head_preds)
    for e in spec.examples:
        if e.goal.pred not in known:
            raise ScenarioError(
                f"example goal predicate {e.goal.pred.name}/{e.goal.pred.arity} "
                f"is neither defined in the background nor learnable")
    seen_rules: set[str] = set()
    for m in spec.metarules:
        if m.name in seen_rules:
            raise ScenarioError(f"duplicate metarule name {m.name!r}")
        seen_rules.add(m.name)


def load_scenario(path: str, name: Optional[str] = None) -> ScenarioSpec:
    import os

    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    try:
        return parse_scenario(text, name=name)
    except (ParseError, ScenarioError) as exc:
        raise type(exc)(f"{path}: {exc}") from None


# ============================================================
# Printing and bundled scenarios
# ============================================================


def print_scenario(spec: ScenarioSpec) -> str:
    out: list[str] = []
    out.append("%% background")
    out.extend(print_clause(c) for c in spec.bk)
    out.append("")
    out.append("%% metarules")
    out.extend(print_metarule(m) for m in spec.metarules)
    out.append("")
    out.append("%% head")
    out.extend(print_symbol(s) for s in spec.head_preds)
    if spec.body_preds:
        out.append("")
        out.append("%% body")
        out.extend(print_symbol(s) for s in spec.body_preds)
    if spec.func_decls:
        out.append("")
        out.append("%% functions")
        out.extend(print_symbol(s) for s in spec.func_decls)
    out.append("")
    out.append("%% examples")
    out.extend(str(e) for e in spec.examples)
    o = spec.options
    out.append("")
    out.append("%% options")
    out.append(f"depth_limit({o.depth_limit}).")
    out.append(f"max_clauses({o.max_clauses}).")
    out.append(f"neg_depth_policy({o.neg_depth_policy}).")
    out.append(f"timeout({int(o.timeout)}).")
    return "\n".join(out) + "\n"


def builtin_scenario_names() -> list[str]:
    root = importlib.resources.files("milsem") / "data" / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".pls"))


def builtin_scenario(name: str) -> ScenarioSpec:
    root = importlib.resources.files("milsem") / "data" / "scenarios"
    entry = root / f"{name}.pls"
    if not entry.is_file():
        raise ScenarioError(
            f"no bundled scenario {name!r}; have {', '.join(builtin_scenario_names())}")
    return parse_scenario(entry.read_text(encoding="utf-8"), name=name)
