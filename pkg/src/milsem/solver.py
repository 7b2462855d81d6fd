"""Depth-bounded SLD resolution over definite programs.

Goals are selected left to right and clauses tried in program order with
chronological backtracking.  The depth budget counts clause applications
plus builtin calls along a single derivation branch; it threads through
conjunctions, so it bounds the size of any one derivation rather than the
nesting of calls.  Three verdicts come out of a query:

    PROVED           a derivation within budget succeeded
    FINITE_FAILURE   the whole search space was exhausted within budget
    DEPTH_EXCEEDED   no proof found and at least one branch was cut short

The cut-short test is exact for clause-defined predicates: a branch only
taints the result when some clause head actually unifies with the goal the
budget could not pay for.  Builtin calls taint conservatively at budget
zero since their behaviour cannot be probed without running them.

Builtins receive the store plus the unresolved goal arguments and yield
once per solution, making any bindings through the store so backtracking
undoes them.  A builtin whose arguments are too uninstantiated to ever
make sense should raise BuiltinError; that aborts the whole query, it is
a program bug rather than a failed branch.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Union

from .terms import (
    Atom,
    FreshVars,
    Program,
    Store,
    Subst,
    Symbol,
    Term,
    _index_key,
    atom_vars,
    rename_apart,
    restrict,
    term_vars,
)


class Verdict(enum.Enum):
    PROVED = "proved"
    FINITE_FAILURE = "finite_failure"
    DEPTH_EXCEEDED = "depth_exceeded"

    def __str__(self) -> str:
        return self.value


class BuiltinError(Exception):
    """A builtin was called with arguments it can never handle."""


BuiltinFn = Callable[[Store, tuple[Term, ...]], Iterator[None]]


class BuiltinTable:
    def __init__(self) -> None:
        self._fns: dict[Symbol, BuiltinFn] = {}

    def register(self, sym: Symbol, fn: BuiltinFn) -> None:
        if sym in self._fns:
            raise ValueError(f"builtin {sym.name}/{sym.arity} already registered")
        self._fns[sym] = fn

    def get(self, sym: Symbol) -> Optional[BuiltinFn]:
        return self._fns.get(sym)

    def __contains__(self, sym: Symbol) -> bool:
        return sym in self._fns

    def predicates(self) -> frozenset[Symbol]:
        return frozenset(self._fns)

    def copy(self) -> "BuiltinTable":
        t = BuiltinTable()
        t._fns = dict(self._fns)
        return t


@dataclass(frozen=True, slots=True)
class SolveConfig:
    depth_limit: int = 300
    occurs_check: bool = False
    max_solutions: Optional[int] = None
    trace: Optional[Callable[[str], None]] = None


@dataclass(slots=True)
class Outcome:
    verdict: Verdict
    answer: Optional[Subst]  # query-variable bindings for the first proof
    steps: int
    depth_used: Optional[int]

    @property
    def proved(self) -> bool:
        return self.verdict is Verdict.PROVED


@dataclass(slots=True)
class Answers:
    answers: list[Subst]
    complete: bool  # False when some branch hit the depth bound
    steps: int


class _Search:
    __slots__ = ("program", "builtins", "config", "store", "counter",
                 "tainted", "steps", "trace")

    def __init__(self, program: Program, builtins: Optional[BuiltinTable],
                 config: SolveConfig, lowest_goal_var: int) -> None:
        self.program = program
        self.builtins = builtins or BuiltinTable()
        self.config = config
        self.store = Store()
        self.counter = FreshVars(start=-lowest_goal_var)
        self.tainted = False
        self.steps = 0
        self.trace = config.trace

    def solve_goal(self, goal: Atom, budget: int, level: int) -> Iterator[int]:
        trace = self.trace
        if trace:
            trace("  " * level + f"call {self._fmt(goal)} [budget {budget}]")
        bfn = self.builtins.get(goal.pred)
        if bfn is not None:
            if budget < 1:
                self.tainted = True
                if trace:
                    trace("  " * level + "cut: out of budget")
                return
            self.steps += 1
            mark = self.store.mark()
            for _ in bfn(self.store, goal.args):
                if trace:
                    trace("  " * level + f"exit {self._fmt(goal)}")
                yield budget - 1
                # roll back this solution before asking for the next
                self.store.undo(mark)
            self.store.undo(mark)
            if trace:
                trace("  " * level + f"fail {self._fmt(goal)}")
            return

        gkey = _index_key(self.store.walk(goal.args[0])) if goal.args else None
        for _cid, clause, key in self.program.clauses_for(goal.pred):
            if gkey is not None and key is not None and key != gkey:
                continue
            if budget < 1:
                if not self.tainted and self._head_applies(clause, goal):
                    self.tainted = True
                    if trace:
                        trace("  " * level + "cut: out of budget")
                continue
            renamed = rename_apart(clause, self.counter)
            mark = self.store.mark()
            if self.store.unify_atoms(renamed.head, goal,
                                      occurs_check=self.config.occurs_check):
                self.steps += 1
                yield from self.solve_goals(renamed.body, budget - 1, level + 1)
            self.store.undo(mark)
        if trace:
            trace("  " * level + f"fail {self._fmt(goal)}")

    def solve_goals(self, goals: Sequence[Atom], budget: int,
                    level: int) -> Iterator[int]:
        if not goals:
            yield budget
            return
        head, rest = goals[0], goals[1:]
        for left in self.solve_goal(head, budget, level):
            yield from self.solve_goals(rest, left, level)

    def _head_applies(self, clause, goal: Atom) -> bool:
        renamed = rename_apart(clause, self.counter)
        mark = self.store.mark()
        ok = self.store.unify_atoms(renamed.head, goal, occurs_check=False)
        self.store.undo(mark)
        return ok

    def _fmt(self, goal: Atom) -> str:
        from .terms import apply_subst_atom
        from .textio import print_atom

        return print_atom(apply_subst_atom(self.store.bindings, goal))


def _as_goal_list(query: Union[Atom, Sequence[Atom]]) -> list[Atom]:
    if isinstance(query, Atom):
        return [query]
    return list(query)


def _query_vars(goals: Sequence[Atom]) -> list[int]:
    seen: list[int] = []
    for g in goals:
        for v in atom_vars(g):
            if v not in seen:
                seen.append(v)
    return seen


def _lowest_var(goals: Sequence[Atom]) -> int:
    lo = 0
    for g in goals:
        for t in g.args:
            for v in term_vars(t):
                if v < lo:
                    lo = v
    return lo


def _check_disjoint(program: Program, builtins: Optional[BuiltinTable]) -> None:
    if builtins is None:
        return
    clash = builtins.predicates() & frozenset(program.predicates())
    if clash:
        names = ", ".join(f"{s.name}/{s.arity}" for s in sorted(clash, key=str))
        raise ValueError(f"predicates defined both by clauses and builtins: {names}")


def _ensure_stack() -> None:
    # deep conjunction chains nest generators, one frame per budget unit
    if sys.getrecursionlimit() < 100_000:
        sys.setrecursionlimit(100_000)


def solve(program: Program, query: Union[Atom, Sequence[Atom]],
          config: SolveConfig = SolveConfig(),
          builtins: Optional[BuiltinTable] = None) -> Outcome:
    """Run a query to its first proof."""
    _check_disjoint(program, builtins)
    _ensure_stack()
    goals = _as_goal_list(query)
    search = _Search(program, builtins, config, _lowest_var(goals))
    qvars = _query_vars(goals)
    for remaining in search.solve_goals(goals, config.depth_limit, 0):
        answer = restrict(search.store.bindings, qvars)
        return Outcome(Verdict.PROVED, answer, search.steps,
                       config.depth_limit - remaining)
    verdict = Verdict.DEPTH_EXCEEDED if search.tainted else Verdict.FINITE_FAILURE
    return Outcome(verdict, None, search.steps, None)


def solve_all(program: Program, query: Union[Atom, Sequence[Atom]],
              config: SolveConfig = SolveConfig(),
              builtins: Optional[BuiltinTable] = None) -> Answers:
    """Collect every answer reachable within the depth budget."""
    _check_disjoint(program, builtins)
    _ensure_stack()
    goals = _as_goal_list(query)
    search = _Search(program, builtins, config, _lowest_var(goals))
    qvars = _query_vars(goals)
    answers: list[Subst] = []
    for _remaining in search.solve_goals(goals, config.depth_limit, 0):
        answers.append(restrict(search.store.bindings, qvars))
        if (config.max_solutions is not None
                and len(answers) >= config.max_solutions):
            return Answers(answers, complete=False, steps=search.steps)
    return Answers(answers, complete=not search.tainted, steps=search.steps)
