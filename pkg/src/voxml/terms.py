"""Predicate-argument terms.

Terms are the common currency of the package: logical forms, program
bodies, habitat predicates, affordance events/results, and scene facts are
all terms.  A term is either an atom (symbol, number, or coordinate
vector) or an application of a predicate symbol to an ordered list of
terms; applications nest to any finite depth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class Term:
    """Base class; concrete terms are Atom, Num, VecLit, and App."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Term):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Num(Term):
    value: float

    def __str__(self) -> str:
        return format_number(self.value)


@dataclass(frozen=True)
class VecLit(Term):
    """Angle-bracket coordinate literal, e.g. <1, 2.3, -0.8>."""

    value: tuple[float, float, float]

    def __str__(self) -> str:
        return format_vector(self.value)


@dataclass(frozen=True)
class App(Term):
    pred: str
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if not self.pred:
            raise ValueError("application predicate must be nonempty")

    def __str__(self) -> str:
        return print_term(self)


# Conditional program constructs are stored as ordinary applications with
# reserved predicate names; the printer renders them with surface syntax.
COND = "cond"
WHILE = "while"

_VAR_RE = re.compile(r"^[a-z]\d*$")


def is_variable(t: Term) -> bool:
    """Single lowercase letter (optionally digit-suffixed) atoms act as
    pattern variables in program bodies and affordance events."""
    return isinstance(t, Atom) and _VAR_RE.match(t.name) is not None


def variables(t: Term) -> set[str]:
    """All variable atoms occurring in a term."""
    if isinstance(t, Atom):
        return {t.name} if is_variable(t) else set()
    if isinstance(t, App):
        out: set[str] = set()
        for a in t.args:
            out |= variables(a)
        return out
    return set()


def substitute(t: Term, binding: dict[str, Term]) -> Term:
    """Replace variable atoms by their bound terms (missing vars stay)."""
    if isinstance(t, Atom) and t.name in binding:
        return binding[t.name]
    if isinstance(t, App):
        return App(t.pred, tuple(substitute(a, binding) for a in t.args))
    return t


def unify_pattern(pattern: Term, ground: Term) -> dict[str, Term] | None:
    """Match a pattern with variables against a ground term.

    Returns the variable binding, or None when the terms do not match.
    Repeated variables must bind the same value.
    """
    binding: dict[str, Term] = {}

    def walk(p: Term, g: Term) -> bool:
        if is_variable(p):
            name = p.name  # type: ignore[union-attr]
            if name in binding:
                return binding[name] == g
            binding[name] = g
            return True
        if isinstance(p, App):
            if not isinstance(g, App) or p.pred != g.pred or len(p.args) != len(g.args):
                return False
            return all(walk(pa, ga) for pa, ga in zip(p.args, g.args))
        return p == g

    return binding if walk(pattern, ground) else None


# ---------------------------------------------------------------------------
# Canonical text form

def format_number(x: float) -> str:
    """Canonical numeric text: at most 9 significant digits."""
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite number in term: {x!r}")
    s = format(float(x), ".9g")
    if s == "-0":
        s = "0"
    return s


def format_vector(v: tuple[float, float, float]) -> str:
    return "<" + ", ".join(format_number(c) for c in v) + ">"


def print_term(t: Term) -> str:
    """Canonical rendering; ``parse_term(print_term(t)) == t`` up to the
    9-significant-digit number format."""
    if isinstance(t, (Atom, Num, VecLit)):
        return str(t)
    if isinstance(t, App):
        if t.pred == COND and len(t.args) == 2:
            return f"{print_term(t.args[0])} -> {print_term(t.args[1])}"
        return t.pred + "(" + ", ".join(print_term(a) for a in t.args) + ")"
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Parsing

class TermSyntaxError(ValueError):
    """Logical-form syntax error with a position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _linecol(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        last_nl = self.text.rfind("\n", 0, pos)
        return line, pos - last_nl

    def error(self, message: str, pos: int | None = None) -> TermSyntaxError:
        line, col = self._linecol(self.pos if pos is None else pos)
        return TermSyntaxError(message, line, col)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise self.error(f"expected '{ch}', found {got!r}")
        self.pos += 1

    def ident(self) -> str:
        m = _IDENT_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected identifier")
        self.pos = m.end()
        return m.group()

    def number(self) -> float:
        sign = 1.0
        if self.peek() == "-":
            self.pos += 1
            sign = -1.0
        m = _NUM_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected number")
        self.pos = m.end()
        return sign * float(m.group())


def _parse_term(sc: _Scanner) -> Term:
    sc.skip_ws()
    ch = sc.peek()
    if ch == "<":
        start = sc.pos
        sc.pos += 1
        comps = []
        for i in range(3):
            sc.skip_ws()
            comps.append(sc.number())
            sc.skip_ws()
            if i < 2:
                sc.expect(",")
        if sc.peek() != ">":
            raise sc.error("expected '>' closing vector", start)
        sc.pos += 1
        return VecLit((comps[0], comps[1], comps[2]))
    if ch == "-" or ch.isdigit():
        return Num(sc.number())
    if not ch:
        raise sc.error("unexpected end of input")
    name = sc.ident()
    sc.skip_ws()
    if sc.peek() != "(":
        return Atom(name)
    open_pos = sc.pos
    sc.pos += 1
    args: list[Term] = []
    sc.skip_ws()
    if sc.peek() == ")":
        raise sc.error("empty argument list")
    while True:
        sc.skip_ws()
        if sc.peek() in (",", ")"):
            raise sc.error("empty argument")
        args.append(_parse_term(sc))
        sc.skip_ws()
        if sc.peek() == ",":
            sc.pos += 1
            continue
        if sc.peek() == ")":
            sc.pos += 1
            return App(name, tuple(args))
        if not sc.peek():
            raise sc.error("unbalanced parenthesis", open_pos)
        raise sc.error(f"expected ',' or ')', found {sc.peek()!r}")


def parse_term(text: str) -> Term:
    """Parse a predicate-argument expression such as ``put(apple, on(plate))``.

    Whitespace between tokens is insignificant.  Raises TermSyntaxError on
    unbalanced parentheses, empty arguments, or trailing garbage.
    """
    sc = _Scanner(text)
    sc.skip_ws()
    if not sc.peek():
        raise sc.error("empty logical form")
    t = _parse_term(sc)
    sc.skip_ws()
    if sc.peek():
        raise sc.error(f"trailing garbage {sc.text[sc.pos:][:10]!r}")
    return t
