"""First-order terms, substitutions, unification and clause machinery.

Terms are immutable and safe to share: a term is a variable, an integer
literal, or a compound with an interned functor symbol.  Variables are
identified by interned integers; parsed variables get non-negative ids with
their names kept in a module-level table, while variables minted by a
renaming counter get negative ids and print as ``_v<n>``.  Keeping ids as
plain ints makes renaming a clause apart a cheap dict-driven rebuild.

Substitutions come in two flavours that share one unification algorithm:

* a plain ``dict[int, Term]`` for the functional surface (`unify`,
  `apply_subst`), convenient for tests and small manipulations;
* a `Store` with a trail for the search engines, which bind destructively
  and undo on backtracking instead of copying dicts.

Stored substitutions may contain chains (X -> Y, Y -> t); `apply_subst`
resolves chains fully.  Unification does not occurs-check by default, so a
binding like X -> f(X) can exist in a store; deep resolution guards against
looping on such bindings by leaving the offending variable in place.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union


# ============================================================
# Symbols and terms
# ============================================================


@dataclass(frozen=True, slots=True)
class Symbol:
    """A functor or predicate name paired with its arity."""

    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


_SYMBOLS: dict[tuple[str, int], Symbol] = {}
_SYMBOLS_LOCK = threading.Lock()


def symbol(name: str, arity: int) -> Symbol:
    """Intern a symbol so equal symbols are usually the same object."""
    key = (name, arity)
    sym = _SYMBOLS.get(key)
    if sym is None:
        with _SYMBOLS_LOCK:
            sym = _SYMBOLS.setdefault(key, Symbol(name, arity))
    return sym


@dataclass(frozen=True, slots=True)
class Var:
    id: int


@dataclass(frozen=True, slots=True)
class Int:
    value: int


@dataclass(frozen=True, slots=True)
class Compound:
    functor: Symbol
    args: tuple["Term", ...]


Term = Union[Var, Int, Compound]


@dataclass(frozen=True, slots=True)
class Atom:
    """A goal or clause-head literal: predicate symbol applied to terms."""

    pred: Symbol
    args: tuple[Term, ...]


@dataclass(frozen=True, slots=True)
class Clause:
    head: Atom
    body: tuple[Atom, ...]


# ------------------------------------------------------------
# Variable name interning
# ------------------------------------------------------------


class _VarTable:
    """Bidirectional name table for non-negative variable ids."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._names: dict[int, str] = {}
        self._next = itertools.count()
        self._lock = threading.Lock()

    def intern(self, name: str) -> int:
        vid = self._ids.get(name)
        if vid is None:
            with self._lock:
                vid = self._ids.get(name)
                if vid is None:
                    vid = next(self._next)
                    self._ids[name] = vid
                    self._names[vid] = name
        return vid

    def fresh_anonymous(self) -> int:
        with self._lock:
            vid = next(self._next)
            name = f"_G{vid}"
            self._ids[name] = vid
            self._names[vid] = name
        return vid

    def name_of(self, vid: int) -> str:
        if vid < 0:
            return f"_v{-vid}"
        return self._names.get(vid, f"_V{vid}")


_VARS = _VarTable()


def var(name: str) -> Var:
    """The named variable; the same name always maps to the same id."""
    return Var(_VARS.intern(name))


def anon_var() -> Var:
    """A fresh variable distinct from every other, as for ``_`` in input."""
    return Var(_VARS.fresh_anonymous())


def var_name(v: Var) -> str:
    return _VARS.name_of(v.id)


class FreshVars:
    """Counter handing out renaming variables, negative ids, per engine.

    Two renamings drawn from the same counter never share a variable.
    Counters are not shared between independent solver or learner runs.
    """

    __slots__ = ("_n",)

    def __init__(self, start: int = 0) -> None:
        self._n = start

    def next_var(self) -> Var:
        self._n += 1
        return Var(-self._n)


# ------------------------------------------------------------
# Construction helpers
# ------------------------------------------------------------


def mk(name: str, *args: Term) -> Compound:
    return Compound(symbol(name, len(args)), tuple(args))


def const(name: str) -> Compound:
    return Compound(symbol(name, 0), ())


def atom(name: str, *args: Term) -> Atom:
    return Atom(symbol(name, len(args)), tuple(args))


def fact(head: Atom) -> Clause:
    return Clause(head, ())


def term_vars(t: Term, into: Optional[list[int]] = None) -> list[int]:
    """Variable ids of a term, in first-occurrence order, without repeats."""
    out: list[int] = [] if into is None else into
    seen = set(out)
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            if x.id not in seen:
                seen.add(x.id)
                out.append(x.id)
        elif isinstance(x, Compound):
            stack.extend(reversed(x.args))
    return out


def atom_vars(a: Atom, into: Optional[list[int]] = None) -> list[int]:
    out: list[int] = [] if into is None else into
    for t in a.args:
        term_vars(t, out)
    return out


def clause_vars(c: Clause) -> list[int]:
    out = atom_vars(c.head)
    for b in c.body:
        atom_vars(b, out)
    return out


# ============================================================
# Destructive bindings with a trail
# ============================================================


class Store:
    """Mutable variable bindings with an undo trail.

    The search engines bind through a store and roll back with
    `mark` / `undo` instead of copying substitution dicts.  `unify` may
    leave partial bindings behind on failure; callers undo to their mark.
    """

    __slots__ = ("bindings", "trail")

    def __init__(self, seed: Optional[Mapping[int, Term]] = None) -> None:
        self.bindings: dict[int, Term] = dict(seed) if seed else {}
        self.trail: list[int] = []

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        b = self.bindings
        t = self.trail
        while len(t) > mark:
            del b[t.pop()]

    def bind(self, vid: int, term: Term) -> None:
        self.bindings[vid] = term
        self.trail.append(vid)

    def walk(self, t: Term) -> Term:
        """Shallow dereference: follow variable bindings to the surface."""
        b = self.bindings
        while isinstance(t, Var):
            nxt = b.get(t.id)
            if nxt is None:
                return t
            t = nxt
        return t

    def resolve(self, t: Term) -> Term:
        """Deep dereference.  Cyclic bindings (from unification without the
        occurs check) are tolerated: the looping variable is left in place."""
        return _resolve(self.bindings, t, ())

    def occurs(self, vid: int, t: Term) -> bool:
        stack = [t]
        while stack:
            x = self.walk(stack.pop())
            if isinstance(x, Var):
                if x.id == vid:
                    return True
            elif isinstance(x, Compound):
                stack.extend(x.args)
        return False

    def unify(self, a: Term, b: Term, occurs_check: bool = False) -> bool:
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            x = self.walk(x)
            y = self.walk(y)
            if x is y:
                continue
            if isinstance(x, Var):
                if isinstance(y, Var):
                    if x.id == y.id:
                        continue
                    self.bind(x.id, y)
                    continue
                if occurs_check and self.occurs(x.id, y):
                    return False
                self.bind(x.id, y)
                continue
            if isinstance(y, Var):
                if occurs_check and self.occurs(y.id, x):
                    return False
                self.bind(y.id, x)
                continue
            if isinstance(x, Int):
                if isinstance(y, Int) and x.value == y.value:
                    continue
                return False
            if not isinstance(y, Compound):
                return False
            if x.functor is not y.functor and x.functor != y.functor:
                return False
            stack.extend(zip(x.args, y.args))
        return True

    def unify_atoms(self, a: Atom, b: Atom, occurs_check: bool = False) -> bool:
        if a.pred is not b.pred and a.pred != b.pred:
            return False
        for x, y in zip(a.args, b.args):
            if not self.unify(x, y, occurs_check):
                return False
        return True

    def export(self) -> dict[int, Term]:
        return dict(self.bindings)


def _resolve(bindings: Mapping[int, Term], t: Term, path: tuple[int, ...]) -> Term:
    while isinstance(t, Var):
        if t.id in path:
            return t  # cyclic binding, leave the variable
        nxt = bindings.get(t.id)
        if nxt is None:
            return t
        path = path + (t.id,)
        t = nxt
    if isinstance(t, Compound) and t.args:
        return Compound(t.functor, tuple(_resolve(bindings, a, path) for a in t.args))
    return t


# ============================================================
# Functional substitution surface
# ============================================================

Subst = dict[int, Term]


def unify(t1: Term, t2: Term, s: Optional[Mapping[int, Term]] = None,
          occurs_check: bool = False) -> Optional[Subst]:
    """Most general unifier extending ``s``, or None.

    Without the occurs check (the default) a cycle-creating pair like
    X and f(X) unifies and stores X -> f(X); with ``occurs_check=True``
    it fails instead.
    """
    st = Store(s)
    if st.unify(t1, t2, occurs_check):
        return st.export()
    return None


def unify_atoms(a1: Atom, a2: Atom, s: Optional[Mapping[int, Term]] = None,
                occurs_check: bool = False) -> Optional[Subst]:
    st = Store(s)
    if st.unify_atoms(a1, a2, occurs_check):
        return st.export()
    return None


def apply_subst(s: Mapping[int, Term], t: Term) -> Term:
    """Apply ``s`` to ``t``, resolving binding chains fully.

    The result is idempotent: applying ``s`` again does not change it
    (cyclic bindings excepted, where the cycle variable survives).
    """
    return _resolve(s, t, ())


def apply_subst_atom(s: Mapping[int, Term], a: Atom) -> Atom:
    return Atom(a.pred, tuple(_resolve(s, t, ()) for t in a.args))


def restrict(s: Mapping[int, Term], vids: Iterable[int]) -> Subst:
    """The substitution narrowed to the given variables, fully resolved."""
    return {vid: _resolve(s, Var(vid), ()) for vid in vids if vid in s}


# ------------------------------------------------------------
# Renaming apart
# ------------------------------------------------------------


def rename_term(t: Term, mapping: dict[int, Var], counter: FreshVars) -> Term:
    if isinstance(t, Var):
        v = mapping.get(t.id)
        if v is None:
            v = counter.next_var()
            mapping[t.id] = v
        return v
    if isinstance(t, Compound) and t.args:
        return Compound(t.functor, tuple(rename_term(a, mapping, counter) for a in t.args))
    return t


def rename_atom(a: Atom, mapping: dict[int, Var], counter: FreshVars) -> Atom:
    return Atom(a.pred, tuple(rename_term(t, mapping, counter) for t in a.args))


def rename_apart(c: Clause, counter: FreshVars) -> Clause:
    """A copy of ``c`` whose variables are fresh for this counter."""
    mapping: dict[int, Var] = {}
    head = rename_atom(c.head, mapping, counter)
    body = tuple(rename_atom(b, mapping, counter) for b in c.body)
    return Clause(head, body)


# ------------------------------------------------------------
# Alpha equivalence (variable renaming only)
# ------------------------------------------------------------


def variant_terms(a: Term, b: Term, fwd: dict[int, int], bwd: dict[int, int]) -> bool:
    if isinstance(a, Var):
        if not isinstance(b, Var):
            return False
        if a.id in fwd:
            return fwd[a.id] == b.id
        if b.id in bwd:
            return False
        fwd[a.id] = b.id
        bwd[b.id] = a.id
        return True
    if isinstance(a, Int):
        return isinstance(b, Int) and a.value == b.value
    if not isinstance(b, Compound) or a.functor != b.functor:
        return False
    return all(variant_terms(x, y, fwd, bwd) for x, y in zip(a.args, b.args))


def variant_atoms(a: Atom, b: Atom, fwd: dict[int, int], bwd: dict[int, int]) -> bool:
    if a.pred != b.pred:
        return False
    return all(variant_terms(x, y, fwd, bwd) for x, y in zip(a.args, b.args))


def variant(a: Clause, b: Clause) -> bool:
    """True when the clauses are equal up to a bijective variable renaming."""
    if len(a.body) != len(b.body):
        return False
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    if not variant_atoms(a.head, b.head, fwd, bwd):
        return False
    return all(variant_atoms(x, y, fwd, bwd) for x, y in zip(a.body, b.body))


# ============================================================
# Programs
# ============================================================


def _index_key(t: Term) -> object:
    """First-argument index key: compounds by functor, ints by value,
    variables as None (matches anything)."""
    if isinstance(t, Compound):
        return t.functor
    if isinstance(t, Int):
        return ("int", t.value)
    return None


class Program:
    """An ordered collection of definite clauses with a predicate index."""

    __slots__ = ("clauses", "_index")

    def __init__(self, clauses: Iterable[Clause]) -> None:
        self.clauses: tuple[Clause, ...] = tuple(clauses)
        index: dict[Symbol, list[tuple[int, Clause, object]]] = {}
        for cid, c in enumerate(self.clauses):
            key = _index_key(c.head.args[0]) if c.head.args else None
            index.setdefault(c.head.pred, []).append((cid, c, key))
        self._index = index

    def clauses_for(self, pred: Symbol) -> list[tuple[int, Clause, object]]:
        return self._index.get(pred, [])

    def defines(self, pred: Symbol) -> bool:
        return pred in self._index

    def predicates(self) -> tuple[Symbol, ...]:
        return tuple(self._index.keys())

    def extended(self, more: Iterable[Clause]) -> "Program":
        return Program(self.clauses + tuple(more))

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)
