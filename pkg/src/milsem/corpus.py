"""Random object-term corpora for exercising learned rule programs.

Terms are drawn from per-fragment grammars shaped so that every generated
term evaluates to a value: selectors are only applied to syntactic pairs
or conses, conditions only to boolean expressions, ``add`` only to integer
expressions, and function positions hold lambdas (possibly through a
curried application), never bare variables, so nothing gets stuck and
nothing diverges.  On top of the grammar every candidate is vetted with
the reference interpreter under both strategies: it must reach a value,
the two strategies must agree on it up to alpha, and the evaluation chain
must be short enough to fit comfortably inside the default proof depth.
Rejected candidates are simply redrawn.

A corpus lives in a ``.terms`` file, one term per line, ``%`` comments.
"""

from __future__ import annotations

import importlib.resources
import random
from typing import Callable, Optional

from .objectlang import (
    BOTTOM,
    OracleConfig,
    StuckTermError,
    alpha_equal,
    eval_chain,
    reference_eval,
)
from .terms import Compound, Int, Term, symbol
from .textio import parse_term, print_term

CORPUS_KINDS = ("pairs", "lists", "conditionals", "lazy_eager", "mixed")

_NAMES = ("a", "b", "c", "x", "y", "z")
_MAX_CHAIN = 30


def _c(name: str, *args: Term) -> Compound:
    return Compound(symbol(name, len(args)), tuple(args))


def _v(name: str) -> Compound:
    return _c("var", _c(name))


class _Gen:
    def __init__(self, kind: str, rng: random.Random, max_depth: int) -> None:
        self.kind = kind
        self.rng = rng
        self.max_depth = max_depth

    def leaf(self, bound: tuple[str, ...]) -> Term:
        rng = self.rng
        picks: list[Callable[[], Term]] = [lambda: _v(rng.choice(_NAMES))]
        if bound:
            picks.append(lambda: _v(rng.choice(bound)))
        if self.kind in ("lazy_eager", "mixed", "pairs", "lists"):
            picks.append(lambda: _c("lit", Int(rng.randrange(10))))
        if self.kind in ("conditionals", "mixed"):
            picks.append(lambda: _c(rng.choice(("true", "false"))))
        if self.kind in ("lists", "mixed"):
            picks.append(lambda: _c("nil"))
        return rng.choice(picks)()

    def bool_expr(self, d: int) -> Term:
        rng = self.rng
        if d <= 0 or rng.random() < 0.5:
            return _c(rng.choice(("true", "false")))
        return _c("if", self.bool_expr(d - 1),
                  _c("thenelse", self.bool_expr(d - 1), self.bool_expr(d - 1)))

    def int_expr(self, d: int) -> Term:
        rng = self.rng
        if d <= 0 or rng.random() < 0.5:
            return _c("lit", Int(rng.randrange(10)))
        return _c("add", self.int_expr(d - 1), self.int_expr(d - 1))

    def lam(self, d: int, bound: tuple[str, ...]) -> Term:
        x = self.rng.choice(_NAMES)
        return _c("lam", _c(x), self.expr(d, bound + (x,)))

    def application(self, d: int, bound: tuple[str, ...]) -> Term:
        # function position: a lambda, or a curried redex producing one
        rng = self.rng
        if d >= 2 and rng.random() < 0.3:
            x, y = rng.sample(_NAMES, 2)
            fun = _c("app",
                     _c("lam", _c(x),
                        _c("lam", _c(y), self.expr(d - 2, bound + (x, y)))),
                     self.expr(d - 2, bound))
            return _c("app", fun, self.expr(d - 2, bound))
        return _c("app", self.lam(d - 1, bound), self.expr(d - 1, bound))

    def expr(self, d: int, bound: tuple[str, ...] = ()) -> Term:
        rng = self.rng
        if d <= 0:
            return self.leaf(bound)
        kind = self.kind
        choices: list[Callable[[], Term]] = [lambda: self.leaf(bound)]
        if kind in ("pairs", "mixed"):
            choices += [
                lambda: _c("pair", self.expr(d - 1, bound), self.expr(d - 1, bound)),
                lambda: _c("fst", _c("pair", self.expr(d - 1, bound),
                                     self.expr(d - 1, bound))),
                lambda: _c("snd", _c("pair", self.expr(d - 1, bound),
                                     self.expr(d - 1, bound))),
                lambda: self.application(d, bound),
            ]
        if kind in ("lists", "mixed"):
            choices += [
                lambda: _c("cons", self.expr(d - 1, bound), self.expr(d - 1, bound)),
                lambda: _c("head", _c("cons", self.expr(d - 1, bound),
                                      self.expr(d - 1, bound))),
                lambda: _c("tail", _c("cons", self.expr(d - 1, bound),
                                      self.expr(d - 1, bound))),
                lambda: self.application(d, bound),
            ]
        if kind in ("conditionals", "mixed"):
            choices += [
                lambda: _c("if", self.bool_expr(d - 1),
                           _c("thenelse", self.expr(d - 1, bound),
                              self.expr(d - 1, bound))),
                lambda: self.bool_expr(d),
                lambda: self.application(d, bound),
            ]
        if kind in ("lazy_eager", "mixed"):
            choices += [
                lambda: self.application(d, bound),
                lambda: self.lam(d - 1, bound),
                lambda: self.int_expr(d),
            ]
        return rng.choice(choices)()


def _acceptable(t: Term) -> bool:
    try:
        lazy = reference_eval(t, OracleConfig(strategy="lazy"))
        eager = reference_eval(t, OracleConfig(strategy="eager"))
    except StuckTermError:
        return False
    if lazy is BOTTOM or eager is BOTTOM:
        return False
    if not alpha_equal(lazy, eager):
        return False  # strategy-sensitive, would make corpora ambiguous
    chain = max(len(eval_chain(t, OracleConfig(strategy=s)))
                for s in ("lazy", "eager"))
    return chain <= _MAX_CHAIN


def generate_term(kind: str, rng: random.Random, max_depth: int = 4) -> Term:
    """One vetted term of the fragment; redraws until acceptable."""
    if kind not in CORPUS_KINDS:
        raise ValueError(f"unknown corpus kind {kind!r}")
    gen = _Gen(kind, rng, max_depth)
    while True:
        t = gen.expr(rng.randrange(1, max_depth + 1))
        if _acceptable(t):
            return t


def generate_corpus(kind: str, count: int, seed: int = 0,
                    rng: Optional[random.Random] = None,
                    max_depth: int = 4) -> list[Term]:
    """``count`` distinct vetted terms, reproducible from the seed."""
    if rng is None:
        rng = random.Random(seed)
    out: list[Term] = []
    seen: set[str] = set()
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > count * 500:
            raise RuntimeError(f"corpus generation for {kind!r} is not converging")
        t = generate_term(kind, rng, max_depth)
        key = print_term(t)
        if key in seen:
            continue
        seen.add(key)
        out.append(t)
    return out


# ============================================================
# Corpus files
# ============================================================


def save_corpus(path: str, terms: list[Term], header: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"% {line}\n")
        for t in terms:
            fh.write(print_term(t) + "\n")


def load_corpus(path: str) -> list[Term]:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh.read())


def parse_corpus(text: str) -> list[Term]:
    out: list[Term] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        out.append(parse_term(line))
    return out


def builtin_corpus_names() -> list[str]:
    root = importlib.resources.files("milsem") / "data" / "corpora"
    return sorted(p.name[:-6] for p in root.iterdir() if p.name.endswith(".terms"))


def builtin_corpus(name: str) -> list[Term]:
    root = importlib.resources.files("milsem") / "data" / "corpora"
    entry = root / f"{name}.terms"
    if not entry.is_file():
        raise ValueError(
            f"no bundled corpus {name!r}; have {', '.join(builtin_corpus_names())}")
    return parse_corpus(entry.read_text(encoding="utf-8"))
