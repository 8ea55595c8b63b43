"""Abstract syntax, parser and pretty-printer for the channel calculus.

Every thread body is a term.  Sequencing is expressed with ``let``; the
surface form ``e; t`` is sugar for ``let _ = e in t`` and ``stop`` is the
empty ``select``.  A statement written without a continuation (for example
``go { z := 1 }``) continues with ``stop``.

Concrete grammar::

    program := {"var" IDENT "=" literal ";"} {"lock" IDENT ";"} "main" "{" term "}"
    term    := "let" IDENT "=" expr "in" term
             | "if" atom ["==" atom] "then" "{" term "}" ["else" "{" term "}"]
             | "select" "{" {branch} "}"
             | "stop"
             | expr [";" term]
    expr    := atom | "load" IDENT | IDENT ":=" atom | "make" "(" "chan" [IDENT] "," INT ")"
             | atom "<-" atom | "<-" atom | "close" "(" atom ")" | "go" "{" term "}"
             | "acquire" "(" IDENT ")" | "release" "(" IDENT ")"
    branch  := "case" [IDENT "="] guard "=>" term ["|"]
    guard   := "<-" atom | atom "<-" atom | "default"
    atom    := INT | "true" | "false" | "(" ")" | IDENT

``stop`` is the canonical printed spelling of the empty select.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

__all__ = [
    "UNIT",
    "EOT",
    "Unit",
    "Eot",
    "ChanRef",
    "Lit",
    "Var",
    "Load",
    "Store",
    "Make",
    "Send",
    "Recv",
    "Close",
    "Go",
    "Acquire",
    "Release",
    "Let",
    "If",
    "Select",
    "Branch",
    "SendGuard",
    "RecvGuard",
    "DefaultGuard",
    "STOP",
    "Program",
    "ParseError",
    "parse",
    "pretty",
    "pretty_term",
    "values_equal",
    "WILDCARD",
]

WILDCARD = "_"


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


class Unit:
    _instance: Unit | None = None

    def __new__(cls) -> Unit:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "()"

    def __reduce__(self):
        return (Unit, ())


class Eot:
    """End-of-transmission marker observed when receiving on a closed channel."""

    _instance: Eot | None = None

    def __new__(cls) -> Eot:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EOT"

    def __reduce__(self):
        return (Eot, ())


UNIT = Unit()
EOT = Eot()


@dataclass(frozen=True)
class ChanRef:
    name: str

    def __repr__(self) -> str:
        return f"chan<{self.name}>"


Value = Union[int, bool, Unit, Eot, ChanRef]


def values_equal(a: Value, b: Value) -> bool:
    """Structural equality; unlike ``==`` it keeps ``True`` and ``1`` apart."""
    return type(a) is type(b) and a == b


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


Atom = Union[Lit, Var]


@dataclass(frozen=True)
class Load:
    var: str


@dataclass(frozen=True)
class Store:
    var: str
    value: Atom


@dataclass(frozen=True)
class Make:
    capacity: int


@dataclass(frozen=True)
class Send:
    chan: Atom
    value: Atom


@dataclass(frozen=True)
class Recv:
    chan: Atom


@dataclass(frozen=True)
class Close:
    chan: Atom


@dataclass(frozen=True)
class Go:
    body: Term


@dataclass(frozen=True)
class Acquire:
    lock: str


@dataclass(frozen=True)
class Release:
    lock: str


Expr = Union[Lit, Var, Load, Store, Make, Send, Recv, Close, Go, Acquire, Release]


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Let:
    name: str
    expr: Expr
    body: Term


@dataclass(frozen=True)
class If:
    lhs: Atom
    rhs: Atom | None
    then: Term
    orelse: Term


@dataclass(frozen=True)
class SendGuard:
    chan: Atom
    value: Atom


@dataclass(frozen=True)
class RecvGuard:
    chan: Atom


@dataclass(frozen=True)
class DefaultGuard:
    pass


Guard = Union[SendGuard, RecvGuard, DefaultGuard]


@dataclass(frozen=True)
class Branch:
    guard: Guard
    binder: str
    body: Term


@dataclass(frozen=True)
class Select:
    branches: tuple[Branch, ...] = ()

    @property
    def is_stop(self) -> bool:
        return not self.branches


Term = Union[Let, If, Select]

STOP = Select(())


@dataclass(frozen=True)
class Program:
    shared: tuple[tuple[str, Value], ...]
    locks: tuple[str, ...]
    main: Term

    @property
    def shared_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.shared)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = {
    "var", "lock", "main", "let", "in", "go", "if", "then", "else", "select",
    "case", "default", "stop", "close", "acquire", "release", "load", "make",
    "chan", "true", "false",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(//|\#)[^\n]*)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><-|:=|==|=>|[{}();,|=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind in ("int", "op"):
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str) -> None:
        self.tokens = tokenize(source)
        self.pos = 0
        self.shared: set[str] = set()
        self.locks: set[str] = set()

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("kw", "op") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected identifier, found {found!r}")
        tok = self.tok
        self.pos += 1
        return tok

    # -- program -----------------------------------------------------------

    def program(self) -> Program:
        shared: list[tuple[str, Value]] = []
        locks: list[str] = []
        while self.at("var"):
            self.pos += 1
            name = self.ident()
            if name.text in self.shared:
                raise self.error(f"duplicate shared variable {name.text!r}", name)
            self.expect("=")
            lit = self.atom(scope=frozenset())
            if not isinstance(lit, Lit):
                raise self.error("initial value must be a literal", name)
            self.expect(";")
            self.shared.add(name.text)
            shared.append((name.text, lit.value))
        while self.at("lock"):
            self.pos += 1
            name = self.ident()
            if name.text in self.locks or name.text in self.shared:
                raise self.error(f"duplicate declaration {name.text!r}", name)
            self.expect(";")
            self.locks.add(name.text)
            locks.append(name.text)
        self.expect("main")
        self.expect("{")
        body = self.term(frozenset())
        self.expect("}")
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after main block")
        return Program(tuple(shared), tuple(locks), body)

    # -- terms -------------------------------------------------------------

    def block(self, scope: frozenset[str]) -> Term:
        self.expect("{")
        if self.at("}"):
            self.pos += 1
            return STOP
        body = self.term(scope)
        self.expect("}")
        return body

    def term(self, scope: frozenset[str]) -> Term:
        if self.accept("let"):
            name = self.ident().text
            self.expect("=")
            expr = self.expr(scope)
            self.expect("in")
            return Let(name, expr, self.term(scope | {name}))
        if self.accept("if"):
            lhs = self.atom(scope)
            rhs = self.atom(scope) if self.accept("==") else None
            self.expect("then")
            then = self.block(scope)
            orelse = self.block(scope) if self.accept("else") else STOP
            return If(lhs, rhs, then, orelse)
        if self.at("select"):
            return self.select(scope)
        if self.accept("stop"):
            return STOP
        expr = self.expr(scope)
        body = self.term(scope) if self.accept(";") else STOP
        return Let(WILDCARD, expr, body)

    def select(self, scope: frozenset[str]) -> Select:
        self.expect("select")
        self.expect("{")
        branches = []
        seen_default = False
        while self.at("case"):
            case_tok = self.tok
            self.pos += 1
            binder = WILDCARD
            if self.tok.kind == "ident" and self.peek().text == "=" and self.peek().kind == "op":
                binder = self.ident().text
                self.expect("=")
            guard: Guard
            if self.accept("default"):
                if seen_default:
                    raise self.error("select has more than one default branch", case_tok)
                seen_default = True
                guard = DefaultGuard()
            elif self.accept("<-"):
                guard = RecvGuard(self.atom(scope))
            else:
                chan = self.atom(scope)
                self.expect("<-")
                guard = SendGuard(chan, self.atom(scope))
            self.expect("=>")
            inner = scope | {binder} if binder != WILDCARD else scope
            if self.at("{"):
                body = self.block(inner)
            else:
                body = self.term(inner)
            branches.append(Branch(guard, binder, body))
            self.accept("|")
        self.expect("}")
        return Select(tuple(branches))

    # -- expressions -------------------------------------------------------

    def expr(self, scope: frozenset[str]) -> Expr:
        tok = self.tok
        if self.accept("load"):
            name = self.ident()
            self._check_shared(name)
            return Load(name.text)
        if self.accept("make"):
            self.expect("(")
            self.expect("chan")
            if self.tok.kind == "ident":
                self.pos += 1  # payload type annotation, ignored
            self.expect(",")
            if self.tok.kind != "int" or int(self.tok.text) < 0:
                raise self.error("channel capacity must be a non-negative integer")
            cap = int(self.tok.text)
            self.pos += 1
            self.expect(")")
            return Make(cap)
        if self.accept("<-"):
            return Recv(self.atom(scope))
        if self.accept("close"):
            self.expect("(")
            chan = self.atom(scope)
            self.expect(")")
            return Close(chan)
        if self.accept("go"):
            return Go(self.block(scope))
        if self.at("acquire") or self.at("release"):
            self.pos += 1
            self.expect("(")
            name = self.ident()
            if name.text not in self.locks:
                raise self.error(f"undeclared lock {name.text!r}", name)
            self.expect(")")
            return Acquire(name.text) if tok.text == "acquire" else Release(name.text)
        if tok.kind == "ident" and self.peek().kind == "op" and self.peek().text == ":=":
            self.pos += 2
            self._check_shared(tok)
            return Store(tok.text, self.atom(scope))
        atom = self.atom(scope)
        if self.accept("<-"):
            return Send(atom, self.atom(scope))
        return atom

    def atom(self, scope: frozenset[str]) -> Atom:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Lit(int(tok.text))
        if self.accept("true"):
            return Lit(True)
        if self.accept("false"):
            return Lit(False)
        if self.at("(") and self.peek().text == ")":
            self.pos += 2
            return Lit(UNIT)
        if tok.kind == "ident":
            if tok.text == WILDCARD:
                raise self.error("'_' cannot be used as a value")
            if tok.text not in scope:
                if tok.text in self.shared:
                    raise self.error(f"shared variable {tok.text!r} must be read with 'load'")
                raise self.error(f"unbound local variable {tok.text!r}")
            self.pos += 1
            return Var(tok.text)
        found = tok.text or "end of input"
        raise self.error(f"expected a value, found {found!r}")

    def _check_shared(self, tok: Token) -> None:
        if tok.text not in self.shared:
            raise self.error(f"undeclared shared variable {tok.text!r}", tok)


def parse(source: str) -> Program:
    """Parse program text; raises :class:`ParseError` with a line/column."""
    return _Parser(source).program()


# ---------------------------------------------------------------------------
# Pretty-printer
# ---------------------------------------------------------------------------


def _atom(a: Atom) -> str:
    if isinstance(a, Var):
        return a.name
    v = a.value
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Unit):
        return "()"
    if isinstance(v, int):
        return str(v)
    raise ValueError(f"{v!r} has no source spelling")


def _expr(e: Expr, indent: int) -> str:
    if isinstance(e, (Lit, Var)):
        return _atom(e)
    if isinstance(e, Load):
        return f"load {e.var}"
    if isinstance(e, Store):
        return f"{e.var} := {_atom(e.value)}"
    if isinstance(e, Make):
        return f"make(chan, {e.capacity})"
    if isinstance(e, Send):
        return f"{_atom(e.chan)} <- {_atom(e.value)}"
    if isinstance(e, Recv):
        return f"<-{_atom(e.chan)}"
    if isinstance(e, Close):
        return f"close({_atom(e.chan)})"
    if isinstance(e, Go):
        return "go " + _block(e.body, indent)
    if isinstance(e, Acquire):
        return f"acquire({e.lock})"
    if isinstance(e, Release):
        return f"release({e.lock})"
    raise TypeError(f"not an expression: {e!r}")


def _block(t: Term, indent: int) -> str:
    pad = "  " * (indent + 1)
    return "{\n" + pad + pretty_term(t, indent + 1) + "\n" + "  " * indent + "}"


def pretty_term(t: Term, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(t, Let):
        if t.name == WILDCARD:
            head = _expr(t.expr, indent)
            if t.body == STOP:
                return head
            return f"{head};\n{pad}{pretty_term(t.body, indent)}"
        return f"let {t.name} = {_expr(t.expr, indent)} in\n{pad}{pretty_term(t.body, indent)}"
    if isinstance(t, If):
        cond = _atom(t.lhs) if t.rhs is None else f"{_atom(t.lhs)} == {_atom(t.rhs)}"
        return f"if {cond} then {_block(t.then, indent)} else {_block(t.orelse, indent)}"
    if isinstance(t, Select):
        if t.is_stop:
            return "stop"
        inner = "  " * (indent + 1)
        lines = ["select {"]
        for br in t.branches:
            g = br.guard
            if isinstance(g, DefaultGuard):
                guard = "default"
            elif isinstance(g, RecvGuard):
                guard = f"<-{_atom(g.chan)}"
            else:
                guard = f"{_atom(g.chan)} <- {_atom(g.value)}"
            binder = "" if br.binder == WILDCARD else f"{br.binder} = "
            lines.append(f"{inner}case {binder}{guard} => {_block(br.body, indent + 1)}")
        lines.append(pad + "}")
        return "\n".join(lines)
    raise TypeError(f"not a term: {t!r}")


def pretty(p: Program) -> str:
    lines = []
    for name, value in p.shared:
        lines.append(f"var {name} = {_atom(Lit(value))};")
    for name in p.locks:
        lines.append(f"lock {name};")
    lines.append("main " + _block(p.main, 0))
    return "\n".join(lines) + "\n"
