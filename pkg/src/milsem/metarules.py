"""Metarules: second-order clause templates and their instantiation.

A metarule is a clause template whose atoms are written in list encoding,
``[p, t1, ..., tn]``, so that predicate and function positions can hold
metavariables.  Binding every metavariable to a symbol (or an integer, for
constants) turns the template into an ordinary first-order clause; the
record of those bindings is a `Metasub`, and a learned hypothesis is a set
of metasubs.

Metavariables are declared alongside the template with a kind and arity:

* ``pred(P/2)``  predicate position, drawn from the learnable or body pools;
* ``func(H/2)``  function symbol inside a term;
* ``const(C)``   an arity-0 symbol or an integer literal.

Instantiation is goal-directed: `instantiate_metarule` first matches the
head template against the current goal, which pins down most metavariables
(a function metavariable over a goal subterm ``pair(a,b)`` can only become
``pair``), then enumerates pool candidates for whatever is left, in pool
order.  Only instantiations whose head unifies with the goal are produced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

from .terms import (
    Atom,
    Clause,
    Compound,
    FreshVars,
    Int,
    Store,
    Symbol,
    Term,
    Var,
    rename_apart,
    symbol,
    term_vars,
)

PRED = "pred"
FUNC = "func"
CONST = "const"


@dataclass(frozen=True, slots=True)
class MetaVar:
    name: str


@dataclass(frozen=True, slots=True)
class Decl:
    """A metavariable declaration: kind, name and arity (0 for consts)."""

    name: str
    kind: str
    arity: int


@dataclass(frozen=True, slots=True)
class TComp:
    """Template compound; the functor may be concrete or a metavariable."""

    functor: Union[Symbol, MetaVar]
    args: tuple["TTerm", ...]


TTerm = Union[Var, Int, MetaVar, TComp]


@dataclass(frozen=True, slots=True)
class TAtom:
    pred: Union[Symbol, MetaVar]
    args: tuple[TTerm, ...]


Binding = Union[Symbol, int]


@dataclass(frozen=True, slots=True)
class Metasub:
    """One metarule name with a full assignment of its metavariables."""

    rule: str
    bindings: tuple[tuple[str, Binding], ...]

    def binding_map(self) -> dict[str, Binding]:
        return dict(self.bindings)


def _binding_key(b: Binding) -> tuple:
    if isinstance(b, Symbol):
        return (0, b.name, b.arity)
    return (1, "", b)


def metasub_key(m: Metasub) -> tuple:
    """Sort key giving the canonical (lexicographic) hypothesis order."""
    return (m.rule, tuple((n, _binding_key(b)) for n, b in m.bindings))


class MetaruleError(ValueError):
    pass


class Metarule:
    """A named clause template with declared metavariables.

    Construction validates that every declaration is used consistently:
    the same metavariable may not appear both as a predicate and as a
    function symbol, and all its occurrences must agree on arity.
    """

    __slots__ = ("name", "decls", "head", "body", "head_pred_meta", "_decl_by_name")

    def __init__(self, name: str, decls: Sequence[Decl], head: TAtom,
                 body: Sequence[TAtom]) -> None:
        self.name = name
        self.head = head
        self.body = tuple(body)
        usage: dict[str, tuple[str, int]] = {}

        def see(mv: MetaVar, kind: str, arity: int) -> None:
            prev = usage.get(mv.name)
            if prev is not None and prev != (kind, arity):
                raise MetaruleError(
                    f"metarule {name}: {mv.name} used as {prev[0]}/{prev[1]} "
                    f"and as {kind}/{arity}")
            usage[mv.name] = (kind, arity)

        def walk_term(t: TTerm) -> None:
            if isinstance(t, MetaVar):
                see(t, CONST, 0)
            elif isinstance(t, TComp):
                if isinstance(t.functor, MetaVar):
                    see(t.functor, FUNC, len(t.args))
                for a in t.args:
                    walk_term(a)

        for a in (head, *self.body):
            if isinstance(a.pred, MetaVar):
                see(a.pred, PRED, len(a.args))
            for t in a.args:
                walk_term(t)

        resolved: list[Decl] = []
        for d in decls:
            used = usage.get(d.name)
            if used is None:
                raise MetaruleError(f"metarule {name}: unused metavariable {d.name}")
            kind, arity = used
            # const declarations may fill arity-0 function positions
            if d.kind == CONST and kind == FUNC and arity == 0:
                kind = CONST
            if d.kind != kind:
                raise MetaruleError(
                    f"metarule {name}: {d.name} declared {d.kind} but used as {kind}")
            if d.arity >= 0 and d.arity != arity:
                raise MetaruleError(
                    f"metarule {name}: {d.name} declared arity {d.arity} "
                    f"but used with arity {arity}")
            resolved.append(Decl(d.name, kind, arity))
        declared = {d.name for d in resolved}
        for n in usage:
            if n not in declared:
                raise MetaruleError(f"metarule {name}: {n} is not declared")
        self.decls = tuple(resolved)
        self._decl_by_name = {d.name: d for d in self.decls}
        self.head_pred_meta = head.pred.name if isinstance(head.pred, MetaVar) else None

    def decl(self, name: str) -> Decl:
        return self._decl_by_name[name]

    def __repr__(self) -> str:
        return f"Metarule({self.name})"


# ============================================================
# Instantiation
# ============================================================

ANY = object()  # restriction sentinel: no constraint from the goal


def _restrict(restr: dict[str, object], name: str, value: Binding) -> bool:
    cur = restr.get(name, ANY)
    if cur is ANY:
        restr[name] = {value}
        return True
    assert isinstance(cur, set)
    if value in cur:
        restr[name] = {value}
        return True
    return False


def _match_term(tt: TTerm, g: Term, store: Store, restr: dict[str, object]) -> bool:
    """Collect metavariable restrictions by laying the template over the
    goal term.  Conservative: unconstrained where the goal is a variable;
    the final head unification is still authoritative."""
    g = store.walk(g)
    if isinstance(tt, Var):
        return True
    if isinstance(g, Var):
        return True  # goal open here, nothing to pin down
    if isinstance(tt, Int):
        return isinstance(g, Int) and g.value == tt.value
    if isinstance(tt, MetaVar):  # bare const position
        if isinstance(g, Int):
            return _restrict(restr, tt.name, g.value)
        if isinstance(g, Compound) and not g.args:
            return _restrict(restr, tt.name, g.functor)
        return False
    assert isinstance(tt, TComp)
    f = tt.functor
    if isinstance(f, MetaVar):
        if isinstance(g, Int) and not tt.args:
            return _restrict(restr, f.name, g.value)
        if not isinstance(g, Compound) or len(g.args) != len(tt.args):
            return False
        if not _restrict(restr, f.name, g.functor):
            return False
        return all(_match_term(a, b, store, restr) for a, b in zip(tt.args, g.args))
    if not isinstance(g, Compound) or g.functor != f:
        return False
    return all(_match_term(a, b, store, restr) for a, b in zip(tt.args, g.args))


def match_head(m: Metarule, goal: Atom, store: Store) -> Optional[dict[str, object]]:
    """Restrictions implied by matching the head template against the goal,
    or None when the metarule cannot apply to this goal at all."""
    restr: dict[str, object] = {}
    if isinstance(m.head.pred, MetaVar):
        if not _restrict(restr, m.head.pred.name, goal.pred):
            return None
    elif m.head.pred != goal.pred:
        return None
    if len(m.head.args) != len(goal.args):
        return None
    for tt, g in zip(m.head.args, goal.args):
        if not _match_term(tt, g, store, restr):
            return None
    return restr


def _inst_term(t: TTerm, b: Mapping[str, Binding]) -> Term:
    if isinstance(t, (Var, Int)):
        return t
    if isinstance(t, MetaVar):
        v = b[t.name]
        if isinstance(v, int):
            return Int(v)
        return Compound(v, ())
    assert isinstance(t, TComp)
    args = tuple(_inst_term(a, b) for a in t.args)
    f = t.functor
    if isinstance(f, MetaVar):
        v = b[f.name]
        if isinstance(v, int):
            if args:
                raise MetaruleError(f"integer binding for {f.name} with arguments")
            return Int(v)
        return Compound(symbol(v.name, len(args)), args)
    return Compound(f, args)


def _inst_atom(a: TAtom, b: Mapping[str, Binding]) -> Atom:
    p = a.pred
    if isinstance(p, MetaVar):
        v = b[p.name]
        if not isinstance(v, Symbol):
            raise MetaruleError(f"predicate metavariable {p.name} bound to integer")
        p = symbol(v.name, len(a.args))
    return Atom(p, tuple(_inst_term(t, b) for t in a.args))


def apply_metasub(m: Metarule, bindings: Mapping[str, Binding]) -> Clause:
    """The first-order clause obtained by filling every metavariable."""
    head = _inst_atom(m.head, bindings)
    body = tuple(_inst_atom(a, bindings) for a in m.body)
    return Clause(head, body)


@dataclass(frozen=True)
class Pools:
    """Candidate symbols for metavariable kinds.

    ``head_preds`` fills predicate positions in heads, ``body_preds`` those
    in bodies; a predicate metavariable occurring in both draws from the
    intersection.  ``funcs`` holds function symbols of any arity and
    ``consts`` arity-0 symbols plus integer literals.
    """

    head_preds: tuple[Symbol, ...]
    body_preds: tuple[Symbol, ...]
    funcs: tuple[Symbol, ...]
    consts: tuple[Binding, ...]


def _positions(m: Metarule, name: str) -> tuple[bool, bool]:
    """(occurs as head predicate, occurs as body predicate)."""
    in_head = isinstance(m.head.pred, MetaVar) and m.head.pred.name == name
    in_body = any(isinstance(a.pred, MetaVar) and a.pred.name == name for a in m.body)
    return in_head, in_body


def static_candidates(m: Metarule, pools: Pools) -> Callable[[Decl, dict], list[Binding]]:
    def candidates(d: Decl, chosen: dict) -> list[Binding]:
        if d.kind == CONST:
            return [c for c in pools.consts
                    if isinstance(c, int) or c.arity == 0]
        if d.kind == FUNC:
            return [f for f in pools.funcs if f.arity == d.arity]
        in_head, in_body = _positions(m, d.name)
        cands: list[Symbol] = []
        if in_head:
            cands = [p for p in pools.head_preds if p.arity == d.arity]
        if in_body:
            body = [p for p in pools.body_preds if p.arity == d.arity]
            cands = [p for p in cands if p in body] if in_head else body
        return list(cands)
    return candidates


def enumerate_bindings(m: Metarule, restr: dict[str, object],
                       candidates: Callable[[Decl, dict], list[Binding]],
                       ) -> Iterator[dict[str, Binding]]:
    """All full metavariable assignments, decl by decl in declaration
    order, each filtered by the goal-derived restriction."""

    decls = m.decls

    def rec(i: int, chosen: dict[str, Binding]) -> Iterator[dict[str, Binding]]:
        if i == len(decls):
            yield dict(chosen)
            return
        d = decls[i]
        allowed = restr.get(d.name, ANY)
        for cand in candidates(d, chosen):
            if allowed is not ANY and cand not in allowed:
                continue
            chosen[d.name] = cand
            yield from rec(i + 1, chosen)
            del chosen[d.name]

    return rec(0, {})


def instantiate_metarule(m: Metarule, goal: Atom, pools: Pools,
                         store: Optional[Store] = None,
                         ) -> Iterator[tuple[Clause, Metasub]]:
    """Ground the metavariables of ``m`` against ``goal``.

    Yields (clause, metasub) pairs whose head unifies with the goal under
    the store's current bindings, in deterministic pool order.  The store
    is left untouched; callers rename the clause apart before resolving
    against it.
    """
    st = store if store is not None else Store()
    restr = match_head(m, goal, st)
    if restr is None:
        return
    # start renaming below every id already in play so the probe cannot
    # conflate a template variable with one of the goal's
    lowest = min((vid for vid in st.bindings if vid < 0), default=0)
    for t in goal.args:
        for vid in term_vars(t):
            lowest = min(lowest, vid)
    scratch_counter = FreshVars(start=-lowest)
    for binding in enumerate_bindings(m, restr, static_candidates(m, pools)):
        clause = apply_metasub(m, binding)
        probe = Store(st.bindings)
        renamed = rename_apart(clause, scratch_counter)
        if probe.unify_atoms(renamed.head, goal):
            msub = Metasub(m.name, tuple((d.name, binding[d.name]) for d in m.decls))
            yield clause, msub
