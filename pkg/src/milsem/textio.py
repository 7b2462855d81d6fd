"""Reading and writing terms, clauses and metarules.

Concrete syntax follows logic-programming convention: a lowercase-leading
name is a functor or predicate, an uppercase- or underscore-leading name is
a variable, ``_`` on its own is anonymous (each occurrence is a distinct
fresh variable), integers are literals, and ``%`` starts a comment that
runs to the end of the line.  Clauses are ``head.`` or ``head :- b1,b2.``.

Metarules use list encoding for template atoms so that predicate and
function positions can hold metavariables:

    metarule(step2l, [func(H/2)], ([step,[H,A,B],[H,C,B]] :- [[step,A,C]])).

Inside a template, an uppercase name is a metavariable exactly when it is
declared; otherwise it is an ordinary first-order variable.  Declarations
are ``pred(P/2)``, ``func(H/2)`` and ``const(C)``; the arity may be left
off and is then inferred from use.

Printing is the inverse up to variable identity: output re-parses to an
alpha-equivalent clause.  Variables minted by renaming print as ``_v<n>``
and anonymous input variables as ``_G<n>``.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Union

from .metarules import CONST, FUNC, PRED, Decl, MetaVar, Metarule, TAtom, TComp, TTerm
from .terms import (
    Atom,
    Clause,
    Compound,
    Int,
    Program,
    Symbol,
    Term,
    Var,
    anon_var,
    symbol,
    var,
    var_name,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int,
                 expected: tuple[str, ...] = ()) -> None:
        self.line = line
        self.col = col
        self.expected = expected
        detail = f"{message} at line {line}, column {col}"
        if expected:
            detail += " (expected " + " or ".join(sorted(expected)) + ")"
        super().__init__(detail)


# ============================================================
# Lexer
# ============================================================

_PUNCT = {"(": "LP", ")": "RP", "[": "LB", "]": "RB", ",": "COMMA",
          ".": "DOT", "/": "SLASH"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int) -> None:
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self) -> str:
        return f"Token({self.kind},{self.text!r})"


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch == ":":
            if i + 1 < n and text[i + 1] == "-":
                toks.append(Token("IMPL", ":-", line, start_col))
                i += 2
                col += 2
                continue
            raise ParseError("stray ':'", line, col, (":-",))
        if ch in _PUNCT:
            toks.append(Token(_PUNCT[ch], ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and _is_name_char(text[j]):
                j += 1
            word = text[i:j]
            kind = "VNAME" if (ch == "_" or ch.isupper()) else "NAME"
            toks.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


# ============================================================
# Parser
# ============================================================


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"found {t.text!r}" if t.text else "unexpected end of input",
                             t.line, t.col, (what,))
        return self.next()

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, kind: str) -> Optional[Token]:
        if self.at(kind):
            return self.next()
        return None

    # ---- terms ----

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "VNAME":
            self.next()
            if t.text == "_":
                return anon_var()
            return var(t.text)
        if t.kind == "INT":
            self.next()
            return Int(int(t.text))
        if t.kind == "NAME":
            self.next()
            if self.accept("LP"):
                args = [self.term()]
                while self.accept("COMMA"):
                    args.append(self.term())
                self.expect("RP", ")")
                return Compound(symbol(t.text, len(args)), tuple(args))
            return Compound(symbol(t.text, 0), ())
        raise ParseError(f"found {t.text!r}" if t.text else "unexpected end of input",
                         t.line, t.col, ("a term",))

    def atom(self) -> Atom:
        t = self.expect("NAME", "a predicate name")
        args: list[Term] = []
        if self.accept("LP"):
            args.append(self.term())
            while self.accept("COMMA"):
                args.append(self.term())
            self.expect("RP", ")")
        return Atom(symbol(t.text, len(args)), tuple(args))

    def clause(self) -> Clause:
        head = self.atom()
        body: list[Atom] = []
        if self.accept("IMPL"):
            body.append(self.atom())
            while self.accept("COMMA"):
                body.append(self.atom())
        self.expect("DOT", ".")
        return Clause(head, tuple(body))

    # ---- symbol declarations: name/arity. ----

    def symbol_decl(self) -> Symbol:
        t = self.expect("NAME", "a symbol name")
        self.expect("SLASH", "/")
        a = self.expect("INT", "an arity")
        self.expect("DOT", ".")
        return symbol(t.text, int(a.text))

    # ---- metarules ----

    def metarule(self) -> Metarule:
        kw = self.expect("NAME", "metarule")
        if kw.text != "metarule":
            raise ParseError(f"found {kw.text!r}", kw.line, kw.col, ("metarule",))
        self.expect("LP", "(")
        name = self.expect("NAME", "a metarule name").text
        self.expect("COMMA", ",")
        decls = self._decl_list()
        declared = {d.name for d in decls}
        self.expect("COMMA", ",")
        self.expect("LP", "(")
        head = self._template_atom(declared)
        self.expect("IMPL", ":-")
        body = self._template_atom_list(declared)
        self.expect("RP", ")")
        self.expect("RP", ")")
        self.expect("DOT", ".")
        return Metarule(name, decls, head, body)

    def _decl_list(self) -> list[Decl]:
        self.expect("LB", "[")
        decls: list[Decl] = []
        if not self.at("RB"):
            decls.append(self._decl())
            while self.accept("COMMA"):
                decls.append(self._decl())
        self.expect("RB", "]")
        return decls

    def _decl(self) -> Decl:
        kw = self.expect("NAME", "pred, func or const")
        if kw.text not in (PRED, FUNC, CONST):
            raise ParseError(f"found {kw.text!r}", kw.line, kw.col,
                             ("pred", "func", "const"))
        self.expect("LP", "(")
        name = self.expect("VNAME", "a metavariable name").text
        arity = -1  # inferred from use
        if self.accept("SLASH"):
            arity = int(self.expect("INT", "an arity").text)
        self.expect("RP", ")")
        if kw.text == CONST:
            arity = 0
        return Decl(name, kw.text, arity)

    def _template_atom_list(self, declared: set[str]) -> list[TAtom]:
        self.expect("LB", "[")
        atoms: list[TAtom] = []
        if not self.at("RB"):
            atoms.append(self._template_atom(declared))
            while self.accept("COMMA"):
                atoms.append(self._template_atom(declared))
        self.expect("RB", "]")
        return atoms

    def _template_atom(self, declared: set[str]) -> TAtom:
        self.expect("LB", "[")
        t = self.peek()
        if t.kind == "NAME":
            self.next()
            is_meta = False
        elif t.kind == "VNAME" and t.text in declared:
            self.next()
            is_meta = True
        else:
            raise ParseError(f"found {t.text!r}", t.line, t.col,
                             ("a predicate name", "a declared metavariable"))
        args: list[TTerm] = []
        while self.accept("COMMA"):
            args.append(self._template_term(declared))
        self.expect("RB", "]")
        if is_meta:
            return TAtom(MetaVar(t.text), tuple(args))
        return TAtom(symbol(t.text, len(args)), tuple(args))

    def _template_term(self, declared: set[str]) -> TTerm:
        t = self.peek()
        if t.kind == "LB":
            self.next()
            f = self.peek()
            if f.kind == "NAME":
                self.next()
                functor: Union[Symbol, MetaVar, None] = f.text
                is_meta = False
            elif f.kind == "VNAME" and f.text in declared:
                self.next()
                is_meta = True
            else:
                raise ParseError(f"found {f.text!r}", f.line, f.col,
                                 ("a functor", "a declared metavariable"))
            args: list[TTerm] = []
            while self.accept("COMMA"):
                args.append(self._template_term(declared))
            self.expect("RB", "]")
            if is_meta:
                return TComp(MetaVar(f.text), tuple(args))
            return TComp(symbol(f.text, len(args)), tuple(args))
        if t.kind == "VNAME":
            self.next()
            if t.text in declared:
                return MetaVar(t.text)
            if t.text == "_":
                return anon_var()
            return var(t.text)
        if t.kind == "INT":
            self.next()
            return Int(int(t.text))
        if t.kind == "NAME":
            self.next()
            if self.accept("LP"):
                args = [self._template_term(declared)]
                while self.accept("COMMA"):
                    args.append(self._template_term(declared))
                self.expect("RP", ")")
                return TComp(symbol(t.text, len(args)), tuple(args))
            return TComp(symbol(t.text, 0), ())
        raise ParseError(f"found {t.text!r}" if t.text else "unexpected end of input",
                         t.line, t.col, ("a template term",))

    def end(self) -> None:
        t = self.peek()
        if t.kind != "EOF":
            raise ParseError(f"trailing input {t.text!r}", t.line, t.col, ("end of input",))


# ============================================================
# Entry points
# ============================================================


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.accept("DOT")
    p.end()
    return t


def parse_atom(text: str) -> Atom:
    p = _Parser(text)
    a = p.atom()
    p.accept("DOT")
    p.end()
    return a


def parse_clause(text: str) -> Clause:
    p = _Parser(text)
    c = p.clause()
    p.end()
    return c


def parse_clauses(text: str) -> list[Clause]:
    p = _Parser(text)
    out: list[Clause] = []
    while not p.at("EOF"):
        out.append(p.clause())
    return out


def parse_program(text: str) -> Program:
    return Program(parse_clauses(text))


def parse_metarule(text: str) -> Metarule:
    p = _Parser(text)
    m = p.metarule()
    p.end()
    return m


def parse_metarules(text: str) -> list[Metarule]:
    p = _Parser(text)
    out: list[Metarule] = []
    while not p.at("EOF"):
        out.append(p.metarule())
    return out


def parse_symbols(text: str) -> list[Symbol]:
    p = _Parser(text)
    out: list[Symbol] = []
    while not p.at("EOF"):
        out.append(p.symbol_decl())
    return out


# ============================================================
# Printing
# ============================================================


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return var_name(t)
    if isinstance(t, Int):
        return str(t.value)
    if not t.args:
        return t.functor.name
    return t.functor.name + "(" + ",".join(print_term(a) for a in t.args) + ")"


def print_atom(a: Atom) -> str:
    if not a.args:
        return a.pred.name
    return a.pred.name + "(" + ",".join(print_term(t) for t in a.args) + ")"


_WRAP_AT = 100


def print_clause(c: Clause) -> str:
    head = print_atom(c.head)
    if not c.body:
        return head + "."
    body = [print_atom(b) for b in c.body]
    flat = head + " :- " + ", ".join(body) + "."
    if len(flat) <= _WRAP_AT:
        return flat
    return head + " :-\n  " + ",\n  ".join(body) + "."


def print_program(clauses: Union[Program, Iterable[Clause]]) -> str:
    return "\n".join(print_clause(c) for c in clauses) + "\n"


def print_symbol(s: Symbol) -> str:
    return f"{s.name}/{s.arity}."


def _print_template_term(t: TTerm) -> str:
    if isinstance(t, Var):
        return var_name(t)
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, MetaVar):
        return t.name
    assert isinstance(t, TComp)
    if isinstance(t.functor, MetaVar):
        inner = [t.functor.name] + [_print_template_term(a) for a in t.args]
        return "[" + ",".join(inner) + "]"
    if not t.args:
        return t.functor.name
    return t.functor.name + "(" + ",".join(_print_template_term(a) for a in t.args) + ")"


def _print_template_atom(a: TAtom) -> str:
    return "[" + ",".join([a.pred.name] + [_print_template_term(t) for t in a.args]) + "]"


def _print_decl(d: Decl) -> str:
    if d.kind == CONST:
        return f"const({d.name})"
    return f"{d.kind}({d.name}/{d.arity})"


def print_metarule(m: Metarule) -> str:
    decls = ",".join(_print_decl(d) for d in m.decls)
    head = _print_template_atom(m.head)
    body = "[" + ",".join(_print_template_atom(a) for a in m.body) + "]"
    return f"metarule({m.name}, [{decls}], ({head} :- {body}))."
