"""Hypothesis search: meta-interpretive learning of rule programs.

The learner proves the positive examples with a resolution engine that is
allowed, where ordinary clause selection fails, to conjure a new clause by
instantiating a metarule against the current goal and add it to the growing
hypothesis.  Alternatives at a goal are tried in a fixed order: builtins,
background clauses, hypothesis clauses already adopted, and only then fresh
metarule instantiations.  A predicate metavariable in a rule body may be
bound to a predicate that does not exist yet, which is how auxiliary
``pred_<n>`` predicates are invented; the branch then has to define them or
die.

Minimality comes from iterative deepening on hypothesis size: `learn` tries
caps 1, 2, ... up to ``max_clauses`` and returns the first hypothesis that
proves every positive and survives the remaining examples, so no strictly
smaller hypothesis can.  Negative and non-terminating examples are checked
with the published solver on background plus candidate: a negative must
finitely fail and a non-terminating example must exhaust the depth budget,
the latter being how a single tagged example can separate evaluation
strategies that agree on all finite behaviour.

Each example is proved under a fresh depth budget with the same accounting
as the solver (one unit per clause application or builtin call), so a
hypothesis found here proves its examples under `solve` as well.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Optional, Sequence, Union

from .metarules import (
    CONST,
    FUNC,
    Metarule,
    Metasub,
    apply_metasub,
    enumerate_bindings,
    match_head,
    metasub_key,
)
from .objectlang import default_builtins
from .scenario import Example, ScenarioSpec
from .solver import BuiltinTable, Outcome, SolveConfig, Verdict, solve
from .terms import (
    Atom,
    Clause,
    FreshVars,
    Program,
    Store,
    Symbol,
    _index_key,
    rename_apart,
    rename_atom,
    symbol,
)
from .textio import print_clause

Trace = Optional[Callable[[str], None]]

_INVENTED = re.compile(r"^pred_(\d+)$")


class _SearchTimeout(Exception):
    pass


@dataclass(frozen=True, slots=True)
class Hypothesis:
    """An ordered set of metarule instantiations and their clauses."""

    metasubs: tuple[Metasub, ...]
    clauses: tuple[Clause, ...]

    @property
    def size(self) -> int:
        return len(self.clauses)

    def program(self, bk: Sequence[Clause]) -> Program:
        return Program(tuple(bk) + self.clauses)

    def __str__(self) -> str:
        return "\n".join(print_clause(c) for c in self.clauses)


@dataclass(slots=True)
class LearnStats:
    size_reached: int = 0
    meta_steps: int = 0
    metasubs_tried: int = 0
    candidates: int = 0
    elapsed: float = 0.0


@dataclass(slots=True)
class LearnResult:
    status: str  # found | exhausted | timeout
    hypothesis: Optional[Hypothesis]
    stats: LearnStats

    @property
    def ok(self) -> bool:
        return self.status == "found"


def invented_base(clauses: Sequence[Clause]) -> int:
    """Highest ``pred_<n>`` already taken, so invention continues after it."""
    hi = 0
    for c in clauses:
        for a in (c.head, *c.body):
            m = _INVENTED.match(a.pred.name)
            if m:
                hi = max(hi, int(m.group(1)))
    return hi


def check_example(program: Program, example: Example, *,
                  depth_limit: int = 300,
                  neg_depth_policy: str = "reject",
                  builtins: Optional[BuiltinTable] = None,
                  ) -> tuple[bool, Outcome]:
    """Whether the program treats one example as its tag demands."""
    if builtins is None:
        builtins = default_builtins()
    out = solve(program, example.goal, SolveConfig(depth_limit=depth_limit),
                builtins)
    if example.tag == "pos":
        return out.proved, out
    if example.tag == "neg":
        if out.verdict is Verdict.PROVED:
            return False, out
        if out.verdict is Verdict.FINITE_FAILURE:
            return True, out
        return neg_depth_policy == "accept", out
    # nonterm: only running out of depth will do; finite failure means the
    # program stops where it should run forever
    return out.verdict is Verdict.DEPTH_EXCEEDED, out


# ============================================================
# The engine
# ============================================================


class _Engine:
    """One size-capped search for a hypothesis proving the given goals."""

    __slots__ = ("bk", "builtins", "metarules", "pools", "head_preds",
                 "size_cap", "depth_limit", "deadline", "trace", "store",
                 "counter", "goals", "hypothesis", "hyp_keys", "invented",
                 "invented_set", "invent_from", "stats", "_ticks")

    def __init__(self, spec: ScenarioSpec, goals: Sequence[Atom],
                 builtins: BuiltinTable, size_cap: int, depth_limit: int,
                 deadline: Optional[float], trace: Trace,
                 invent_from: int) -> None:
        self.bk = Program(spec.bk)
        self.builtins = builtins
        self.metarules = spec.metarules
        self.pools = spec.pools()
        self.head_preds = frozenset(self.pools.head_preds)
        self.size_cap = size_cap
        self.depth_limit = depth_limit
        self.deadline = deadline
        self.trace = trace
        self.store = Store()
        self.counter = FreshVars()
        # examples must not share variables with each other or the program
        self.goals = [rename_atom(g, {}, self.counter) for g in goals]
        self.hypothesis: list[tuple[Metasub, Clause]] = []
        self.hyp_keys: set = set()
        self.invented: list[Symbol] = []
        self.invented_set: set[Symbol] = set()
        self.invent_from = invent_from
        self.stats = LearnStats(size_reached=size_cap)
        self._ticks = 0

    # ---- bookkeeping ----

    def _tick(self) -> None:
        self._ticks += 1
        if (self._ticks & 0x3FF) == 0 and self.deadline is not None:
            if time.monotonic() > self.deadline:
                raise _SearchTimeout

    def _push(self, msub: Metasub, clause: Clause, key: tuple,
              new_preds: list[Symbol]) -> None:
        self.hypothesis.append((msub, clause))
        self.hyp_keys.add(key)
        for p in new_preds:
            self.invented.append(p)
            self.invented_set.add(p)
        if self.trace:
            self.trace("  + " + print_clause(clause))

    def _pop(self, key: tuple, new_preds: list[Symbol]) -> None:
        self.hypothesis.pop()
        self.hyp_keys.discard(key)
        for _ in new_preds:
            self.invented_set.discard(self.invented.pop())
        if self.trace:
            self.trace("  - backtrack")

    # ---- candidate clauses from metarules ----

    def _candidates_fn(self, m: Metarule, tentative: Optional[str]):
        pools = self.pools

        def candidates(d, _chosen) -> list:
            if d.kind == CONST:
                return list(pools.consts)
            if d.kind == FUNC:
                return [f for f in pools.funcs if f.arity == d.arity]
            in_head = m.head_pred_meta == d.name
            preds: list[Symbol] = [p for p in pools.body_preds
                                   if p.arity == d.arity]
            preds += [p for p in pools.head_preds if p.arity == d.arity]
            preds += [p for p in self.invented if p.arity == d.arity]
            if tentative is not None and not in_head:
                preds.append(symbol(tentative, d.arity))
            out: list[Symbol] = []
            seen: set[Symbol] = set()
            for p in preds:
                if p not in seen:
                    seen.add(p)
                    out.append(p)
            return out

        return candidates

    def _new_clauses(self, goal: Atom) -> Iterator[
            tuple[Clause, Metasub, tuple, list[Symbol]]]:
        room_to_define = len(self.hypothesis) + 1 < self.size_cap
        tentative = (f"pred_{self.invent_from + len(self.invented) + 1}"
                     if room_to_define else None)
        for m in self.metarules:
            restr = match_head(m, goal, self.store)
            if restr is None:
                continue
            cands = self._candidates_fn(m, tentative)
            for binding in enumerate_bindings(m, restr, cands):
                msub = Metasub(m.name, tuple((d.name, binding[d.name])
                                             for d in m.decls))
                key = metasub_key(msub)
                if key in self.hyp_keys:
                    continue  # identical clause already adopted, reuse covers it
                clause = apply_metasub(m, binding)
                new_preds = [b for _n, b in msub.bindings
                             if isinstance(b, Symbol) and tentative is not None
                             and b.name == tentative]
                yield clause, msub, key, new_preds

    # ---- resolution ----

    def _prove(self, goal: Atom, budget: int) -> Iterator[int]:
        self._tick()
        pred = goal.pred
        bfn = self.builtins.get(pred)
        if bfn is not None:
            if budget < 1:
                return
            self.stats.meta_steps += 1
            mark = self.store.mark()
            for _ in bfn(self.store, goal.args):
                yield budget - 1
                self.store.undo(mark)
            self.store.undo(mark)
            return
        if budget < 1:
            return
        gkey = _index_key(self.store.walk(goal.args[0])) if goal.args else None

        for _cid, clause, key in self.bk.clauses_for(pred):
            if gkey is not None and key is not None and key != gkey:
                continue
            renamed = rename_apart(clause, self.counter)
            mark = self.store.mark()
            if self.store.unify_atoms(renamed.head, goal):
                self.stats.meta_steps += 1
                yield from self._prove_seq(renamed.body, budget - 1)
            self.store.undo(mark)

        if pred not in self.head_preds and pred not in self.invented_set:
            return

        for _msub, clause in list(self.hypothesis):  # snapshot: later
            # additions belong to deeper choice points, not this one
            if clause.head.pred != pred:
                continue
            ckey = _index_key(clause.head.args[0]) if clause.head.args else None
            if gkey is not None and ckey is not None and ckey != gkey:
                continue
            renamed = rename_apart(clause, self.counter)
            mark = self.store.mark()
            if self.store.unify_atoms(renamed.head, goal):
                self.stats.meta_steps += 1
                yield from self._prove_seq(renamed.body, budget - 1)
            self.store.undo(mark)

        if len(self.hypothesis) >= self.size_cap:
            return
        for clause, msub, key, new_preds in self._new_clauses(goal):
            renamed = rename_apart(clause, self.counter)
            mark = self.store.mark()
            if self.store.unify_atoms(renamed.head, goal):
                self.stats.metasubs_tried += 1
                self.stats.meta_steps += 1
                self._push(msub, clause, key, new_preds)
                yield from self._prove_seq(renamed.body, budget - 1)
                self._pop(key, new_preds)
            self.store.undo(mark)

    def _prove_seq(self, goals: Sequence[Atom], budget: int) -> Iterator[int]:
        if not goals:
            yield budget
            return
        head, rest = goals[0], goals[1:]
        for left in self._prove(head, budget):
            yield from self._prove_seq(rest, left)

    def prove_goals(self, idx: int = 0) -> Iterator[None]:
        """Prove the goals in order, backtracking across them; yields once
        per way of proving them all under some hypothesis."""
        if idx == len(self.goals):
            yield None
            return
        for _ in self._prove(self.goals[idx], self.depth_limit):
            yield from self.prove_goals(idx + 1)

    def snapshot(self) -> Hypothesis:
        return Hypothesis(tuple(ms for ms, _ in self.hypothesis),
                          tuple(c for _, c in self.hypothesis))


# ============================================================
# Public surface
# ============================================================


@dataclass(frozen=True, slots=True)
class ProofState:
    """Hypothesis in force at the moment a meta-proof succeeded."""

    metasubs: tuple[Metasub, ...]
    clauses: tuple[Clause, ...]


def meta_prove(spec: ScenarioSpec, goals: Union[Atom, Sequence[Atom]], *,
               size_cap: Optional[int] = None,
               depth_limit: Optional[int] = None,
               builtins: Optional[BuiltinTable] = None,
               ) -> Iterator[ProofState]:
    """Meta-prove goals against a scenario's background, growing a
    hypothesis as needed; one state per complete proof, in search order."""
    if isinstance(goals, Atom):
        goals = [goals]
    engine = _Engine(
        spec, list(goals),
        builtins if builtins is not None else default_builtins(),
        size_cap if size_cap is not None else spec.options.max_clauses,
        depth_limit if depth_limit is not None else spec.options.depth_limit,
        None, None, invented_base(spec.bk))
    for _ in engine.prove_goals():
        yield ProofState(tuple(ms for ms, _ in engine.hypothesis),
                         tuple(c for _, c in engine.hypothesis))


def learn(spec: ScenarioSpec, *,
          builtins: Optional[BuiltinTable] = None,
          prune: bool = True,
          depth_limit: Optional[int] = None,
          max_clauses: Optional[int] = None,
          timeout: Optional[float] = None,
          trace: Trace = None) -> LearnResult:
    """Search for the smallest hypothesis consistent with every example.

    Deepens on hypothesis size, so the result is minimal in clause count.
    ``prune`` skips re-validating a candidate clause set already seen under
    a different derivation order; it never changes which hypothesis is
    found, only how much checking happens on the way.
    """
    if builtins is None:
        builtins = default_builtins()
    opts = spec.options
    if depth_limit is None:
        depth_limit = opts.depth_limit
    if max_clauses is None:
        max_clauses = opts.max_clauses
    if timeout is None:
        timeout = opts.timeout
    deadline = time.monotonic() + timeout if timeout > 0 else None

    started = time.monotonic()
    total = LearnStats()
    seen: set[frozenset] = set()
    base = invented_base(spec.bk)
    pos_goals = [e.goal for e in spec.positives()]

    def merge(engine: _Engine) -> None:
        total.meta_steps += engine.stats.meta_steps
        total.metasubs_tried += engine.stats.metasubs_tried

    try:
        for n in range(1, max_clauses + 1):
            total.size_reached = n
            if trace:
                trace(f"size cap {n}")
            engine = _Engine(spec, pos_goals, builtins, n, depth_limit,
                             deadline, trace, base)
            for _ in engine.prove_goals():
                candidate = engine.snapshot()
                key = frozenset(metasub_key(ms) for ms in candidate.metasubs)
                if prune:
                    if key in seen:
                        continue
                    seen.add(key)
                total.candidates += 1
                program = Program(tuple(spec.bk) + candidate.clauses)
                good = all(
                    check_example(program, e, depth_limit=depth_limit,
                                  neg_depth_policy=opts.neg_depth_policy,
                                  builtins=builtins)[0]
                    for e in spec.examples)
                if good:
                    merge(engine)
                    total.elapsed = time.monotonic() - started
                    if trace:
                        trace(f"found at size {candidate.size}")
                    return LearnResult("found", candidate, total)
                if trace:
                    trace("  rejected by examples")
            merge(engine)
    except _SearchTimeout:
        merge(engine)
        total.elapsed = time.monotonic() - started
        return LearnResult("timeout", None, total)
    total.elapsed = time.monotonic() - started
    return LearnResult("exhausted", None, total)


@dataclass(slots=True)
class SeqResult:
    """Outcome of learning a chain of scenarios, each building on the last."""

    results: tuple[tuple[str, LearnResult], ...]
    induced: tuple[Clause, ...]
    combined: Optional[Program]
    elapsed: float

    @property
    def ok(self) -> bool:
        return bool(self.results) and all(r.ok for _, r in self.results)


def learn_seq(specs: Sequence[ScenarioSpec], *,
              builtins: Optional[BuiltinTable] = None,
              prune: bool = True,
              trace: Trace = None) -> SeqResult:
    """Learn scenarios in order, feeding each hypothesis to the next task
    as background.  The combined program is the first scenario's background
    plus everything induced along the way."""
    started = time.monotonic()
    induced: list[Clause] = []
    results: list[tuple[str, LearnResult]] = []
    for spec in specs:
        grown = replace(spec, bk=spec.bk + tuple(induced))
        if trace:
            trace(f"task {spec.name}")
        res = learn(grown, builtins=builtins, prune=prune, trace=trace)
        results.append((spec.name, res))
        if not res.ok:
            break
        induced.extend(res.hypothesis.clauses)
    elapsed = time.monotonic() - started
    combined: Optional[Program] = None
    if specs and results and all(r.ok for _, r in results) \
            and len(results) == len(specs):
        combined = Program(tuple(specs[0].bk) + tuple(induced))
    return SeqResult(tuple(results), tuple(induced), combined, elapsed)
