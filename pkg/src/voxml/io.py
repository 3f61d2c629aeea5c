"""Text serialization for voxemes, voxicons, scenes, and traces.

The voxeme format is a nested key-value rendering of the attribute-value
structure, one field per line, with the field names written exactly as the
modeling language defines them (LEX, PRED, TYPE, HEAD, COMPONENTS,
CONCAVITY, ROTATSYM, REFLECTSYM, HABITAT, INTR, EXTR, AFFORD_STR,
EMBODIMENT, SCALE, MOVABLE, ARGS, BODY, CLASS, VALUE, ARITY, REFERENT,
MAPPING, ORIENTATION, SPACE, AXIS).  Serialization is canonical: stable
field order, stable spacing, numbers at 9 significant digits, so
``serialize(parse(text))`` is a fixed point and parse/serialize round-trip
exactly.

Scenes are one ``instance`` line per object; traces are newline-delimited
records, one transition per line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from . import terms
from .model import (
    Affordance,
    AffordanceKind,
    Align,
    ArgSpec,
    AttributeArity,
    AttributeVoxeme,
    Axis,
    Component,
    Concavity,
    Embodiment,
    EmbodimentScale,
    FaceLabel,
    FunctionSpace,
    FunctionVoxeme,
    HabitatGroup,
    HabitatSpec,
    HeadShape,
    LabeledConstraint,
    Lex,
    ObjectTypeStructure,
    ObjectVoxeme,
    Orientation,
    Plane,
    PredicateConstraint,
    ProgramHead,
    ProgramVoxeme,
    Referent,
    RelationClass,
    ScaleKind,
    RelationVoxeme,
    RelativeDim,
    SignedAxis,
    Voxeme,
    VoxemeKind,
)
from .spatial import SceneObject, SceneState, Vec3
from .terms import App, Atom, Num, Term, VecLit, format_vector, print_term

if TYPE_CHECKING:  # pragma: no cover
    from .interpreter import Trace
    from .voxicon import Voxicon

VOXEME_EXTENSION = ".vox"
SCENE_EXTENSION = ".scene"

_SCALE_TOKENS = {
    EmbodimentScale.SMALLER_THAN_AGENT: "<agent",
    EmbodimentScale.AGENT_SIZED: "agent",
    EmbodimentScale.LARGER_THAN_AGENT: ">agent",
}
_SCALE_FROM_TOKEN = {v: k for k, v in _SCALE_TOKENS.items()}


class VoxmlSyntaxError(ValueError):
    """Positioned parse diagnostic."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class VoxiconLoadError(ValueError):
    """Per-entry parse errors, aggregated with entry indices."""

    def __init__(self, errors: list[tuple[int, VoxmlSyntaxError]]):
        self.errors = errors
        lines = [f"entry {i}: {e}" for i, e in errors]
        super().__init__("voxicon load failed:\n" + "\n".join(lines))


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#.*)
      | (?P<arrow>->)
      | (?P<lshift><<)
      | (?P<num>\d+(\.\d+)?([eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[{}\[\]()=,:+\-<>])
    """,
    re.VERBOSE,
)

_PUNCT_KIND = {
    "{": "LBRACE", "}": "RBRACE", "[": "LBRACKET", "]": "RBRACKET",
    "(": "LPAREN", ")": "RPAREN", "=": "EQUALS", ",": "COMMA",
    ":": "COLON", "+": "PLUS", "-": "MINUS", "<": "LT", ">": "GT",
}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def end_col(self) -> int:
        return self.col + len(self.text)


def _tokenize_line(text: str, lineno: int) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise VoxmlSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        pos = m.end()
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        lexeme = m.group()
        if kind == "arrow":
            tokens.append(_Token("ARROW", lexeme, lineno, m.start() + 1))
        elif kind == "lshift":
            tokens.append(_Token("LSHIFT", lexeme, lineno, m.start() + 1))
        elif kind == "num":
            tokens.append(_Token("NUMBER", lexeme, lineno, m.start() + 1))
        elif kind == "ident":
            tokens.append(_Token("IDENT", lexeme, lineno, m.start() + 1))
        else:
            tokens.append(_Token(_PUNCT_KIND[lexeme], lexeme, lineno, m.start() + 1))
    return tokens


class _Cursor:
    """Walks one line's tokens."""

    def __init__(self, tokens: list[_Token], lineno: int):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno

    def peek(self, ahead: int = 0) -> _Token | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def error(self, message: str) -> VoxmlSyntaxError:
        tok = self.peek()
        col = tok.col if tok else (self.tokens[-1].end_col if self.tokens else 1)
        return VoxmlSyntaxError(message, self.lineno, col)

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of line")
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = repr(tok.text) if tok else "end of line"
            raise self.error(f"expected {what or kind}, found {found}")
        self.pos += 1
        return tok

    def expect_end(self) -> None:
        if not self.at_end():
            raise self.error(f"trailing tokens after field: {self.peek().text!r}")

    def ident(self, what: str = "identifier") -> str:
        return self.expect("IDENT", what).text


# ---------------------------------------------------------------------------
# Line stream

@dataclass
class _Line:
    tokens: list[_Token]
    lineno: int

    def cursor(self) -> _Cursor:
        return _Cursor(self.tokens, self.lineno)


def _lines_of(text: str) -> list[_Line]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw, i)
        if tokens:
            out.append(_Line(tokens, i))
    return out


class _Stream:
    def __init__(self, lines: list[_Line]):
        self.lines = lines
        self.pos = 0

    def peek(self) -> _Line | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next(self, context: str) -> _Line:
        line = self.peek()
        if line is None:
            last = self.lines[-1].lineno if self.lines else 1
            raise VoxmlSyntaxError(f"unexpected end of input in {context}", last, 1)
        self.pos += 1
        return line


def _is_close(line: _Line) -> bool:
    return len(line.tokens) == 1 and line.tokens[0].kind == "RBRACE"


# ---------------------------------------------------------------------------
# Shared token-level parsers

def _parse_number(cur: _Cursor) -> float:
    sign = 1.0
    if cur.peek() and cur.peek().kind == "MINUS":
        cur.next()
        sign = -1.0
    tok = cur.expect("NUMBER", "number")
    return sign * float(tok.text)


def _parse_vector(cur: _Cursor) -> tuple[float, float, float]:
    cur.expect("LT", "'<' opening a vector")
    xs = []
    for i in range(3):
        xs.append(_parse_number(cur))
        if i < 2:
            cur.expect("COMMA")
    cur.expect("GT", "'>' closing the vector")
    return (xs[0], xs[1], xs[2])


def _parse_term(cur: _Cursor) -> Term:
    tok = cur.peek()
    if tok is None:
        raise cur.error("expected a term")
    if tok.kind == "LT":
        return VecLit(_parse_vector(cur))
    if tok.kind in ("MINUS", "NUMBER"):
        return Num(_parse_number(cur))
    name = cur.ident("a term")
    if cur.peek() and cur.peek().kind == "LPAREN":
        cur.next()
        args = []
        if cur.peek() and cur.peek().kind == "RPAREN":
            raise cur.error("empty argument list")
        while True:
            args.append(_parse_term(cur))
            tok = cur.peek()
            if tok and tok.kind == "COMMA":
                cur.next()
                continue
            if tok and tok.kind == "RPAREN":
                cur.next()
                return App(name, tuple(args))
            raise cur.error("expected ',' or ')' in argument list")
    return Atom(name)


def _parse_body_term(cur: _Cursor) -> Term:
    t = _parse_term(cur)
    if cur.peek() and cur.peek().kind == "ARROW":
        cur.next()
        return App(terms.COND, (t, _parse_term(cur)))
    return t


def _parse_type_tag(cur: _Cursor) -> str:
    # Tags like "3D" lex as a number glued to an identifier.
    tok = cur.peek()
    if tok and tok.kind == "NUMBER":
        nxt = cur.peek(1)
        if nxt and nxt.kind == "IDENT" and nxt.col == tok.end_col:
            cur.next()
            cur.next()
            return tok.text + nxt.text
        raise cur.error("type tag may not be a bare number")
    return cur.ident("type tag")


def _parse_arg_spec(cur: _Cursor) -> ArgSpec:
    var = cur.ident("argument variable")
    cur.expect("COLON", "':' between variable and type tag")
    return ArgSpec(var, _parse_type_tag(cur))


def _parse_indexed(cur: _Cursor, letter: str) -> int:
    tok = cur.expect("IDENT", f"'{letter}['")
    if tok.text != letter:
        raise cur.error(f"expected '{letter}[...]', found {tok.text!r}")
    cur.expect("LBRACKET")
    idx = int(cur.expect("NUMBER", "index").text)
    cur.expect("RBRACKET")
    return idx


def _parse_enum(cur: _Cursor, enum_cls, what: str):
    tok = cur.expect("IDENT", what)
    try:
        return enum_cls(tok.text)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise VoxmlSyntaxError(
            f"unknown {what} {tok.text!r} (expected one of: {allowed})", tok.line, tok.col
        ) from None


def _parse_signed_axis(cur: _Cursor) -> SignedAxis:
    positive = True
    tok = cur.peek()
    if tok and tok.kind in ("PLUS", "MINUS"):
        cur.next()
        positive = tok.kind == "PLUS"
    axis = _parse_enum(cur, Axis, "axis")
    return SignedAxis(axis, positive)


def _brace_list(cur: _Cursor, item_parser) -> list:
    """``{a, b, c}`` or a bare comma list running to the end of the line."""
    items = []
    if cur.peek() and cur.peek().kind == "LBRACE":
        cur.next()
        if cur.peek() and cur.peek().kind == "RBRACE":
            cur.next()
            return items
        while True:
            items.append(item_parser(cur))
            tok = cur.next()
            if tok.kind == "COMMA":
                continue
            if tok.kind == "RBRACE":
                return items
            raise cur.error("expected ',' or '}' in list")
    while True:
        items.append(item_parser(cur))
        if cur.peek() and cur.peek().kind == "COMMA":
            cur.next()
            continue
        return items


# ---------------------------------------------------------------------------
# Voxeme block parsers

def _parse_lex(stream: _Stream) -> Lex:
    pred = None
    gl: tuple[str, ...] = ()
    while True:
        line = stream.next("LEX block")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("LEX field")
        cur.expect("EQUALS", "'='")
        if key == "PRED":
            pred = cur.ident("predicate lexeme")
        elif key == "TYPE":
            gl = tuple(_brace_list(cur, _parse_type_tag))
        else:
            raise VoxmlSyntaxError(f"unknown field {key!r} in LEX", line.lineno, line.tokens[0].col)
        cur.expect_end()
    if pred is None:
        raise VoxmlSyntaxError("LEX block is missing PRED", stream.lines[stream.pos - 1].lineno, 1)
    return Lex(pred, gl)


def _parse_component(cur: _Cursor) -> Component:
    name = cur.ident("component name")
    coindex = None
    plural = False
    if cur.peek() and cur.peek().kind == "LBRACKET":
        cur.next()
        coindex = int(cur.expect("NUMBER", "coindex").text)
        cur.expect("RBRACKET")
    if cur.peek() and cur.peek().kind == "PLUS":
        cur.next()
        plural = True
    return Component(name, coindex, plural)


def _parse_object_type(stream: _Stream) -> ObjectTypeStructure:
    head = None
    head_coindex = None
    components: tuple[Component, ...] = ()
    concavity = None
    rotat: tuple[Axis, ...] = ()
    reflect: tuple[Plane, ...] = ()
    seen: set[str] = set()
    while True:
        line = stream.next("TYPE block")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("TYPE field")
        if key in seen:
            raise VoxmlSyntaxError(f"duplicate field {key!r}", line.lineno, line.tokens[0].col)
        seen.add(key)
        cur.expect("EQUALS", "'='")
        if key == "HEAD":
            head = _parse_enum(cur, HeadShape, "head shape")
            if cur.peek() and cur.peek().kind == "LBRACKET":
                cur.next()
                head_coindex = int(cur.expect("NUMBER", "coindex").text)
                cur.expect("RBRACKET")
        elif key == "COMPONENTS":
            tok = cur.peek()
            if tok and tok.kind == "IDENT" and tok.text == "nil":
                cur.next()
            else:
                components = tuple(_brace_list(cur, _parse_component))
        elif key == "CONCAVITY":
            concavity = _parse_enum(cur, Concavity, "concavity")
        elif key == "ROTATSYM":
            rotat = tuple(_brace_list(cur, lambda c: _parse_enum(c, Axis, "axis")))
        elif key == "REFLECTSYM":
            reflect = tuple(_brace_list(cur, lambda c: _parse_enum(c, Plane, "plane")))
        else:
            raise VoxmlSyntaxError(f"unknown field {key!r} in TYPE", line.lineno, line.tokens[0].col)
        cur.expect_end()
    if head is None:
        raise VoxmlSyntaxError("TYPE block is missing HEAD", stream.lines[stream.pos - 1].lineno, 1)
    if concavity is None:
        raise VoxmlSyntaxError("TYPE block is missing CONCAVITY", stream.lines[stream.pos - 1].lineno, 1)
    return ObjectTypeStructure(head, head_coindex, components, concavity, rotat, reflect)


def _parse_constraint(cur: _Cursor):
    # align(D, E_D') | label(+A) | D << D' | predicate term
    first = cur.peek()
    if first and first.kind == "IDENT" and cur.peek(1) and cur.peek(1).kind == "LSHIFT":
        lesser = _parse_enum(cur, Axis, "axis")
        cur.expect("LSHIFT")
        greater = _parse_enum(cur, Axis, "axis")
        return RelativeDim(lesser, greater)
    if first and first.kind == "IDENT" and first.text == "align":
        cur.next()
        cur.expect("LPAREN")
        obj_axis = _parse_enum(cur, Axis, "axis")
        cur.expect("COMMA")
        etok = cur.expect("IDENT", "embedding axis (E_X, E_Y, E_Z)")
        if not etok.text.startswith("E_"):
            raise VoxmlSyntaxError(
                f"expected embedding axis E_X/E_Y/E_Z, found {etok.text!r}", etok.line, etok.col)
        try:
            emb = Axis(etok.text[2:])
        except ValueError:
            raise VoxmlSyntaxError(
                f"unknown embedding axis {etok.text!r}", etok.line, etok.col) from None
        cur.expect("RPAREN")
        return Align(obj_axis, emb)
    if (first and first.kind == "IDENT" and cur.peek(1) and cur.peek(1).kind == "LPAREN"
            and cur.peek(2) and cur.peek(2).kind in ("PLUS", "MINUS")):
        label = cur.ident()
        cur.expect("LPAREN")
        axis = _parse_signed_axis(cur)
        cur.expect("RPAREN")
        return FaceLabel(label, axis)
    return PredicateConstraint(_parse_term(cur))


def _parse_habitat_group(stream: _Stream, index: int, opener: _Line) -> HabitatGroup:
    constraints: list[LabeledConstraint] = []
    while True:
        line = stream.next("habitat group")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("habitat constraint label")
        cur.expect("EQUALS", "'='")
        items = _brace_list(cur, _parse_constraint)
        cur.expect_end()
        for item in items:
            constraints.append(LabeledConstraint(key, item))
    return HabitatGroup(index, tuple(constraints))


def _parse_habitat_side(stream: _Stream, opener: _Line) -> tuple[HabitatGroup, ...]:
    groups: list[HabitatGroup] = []
    while True:
        line = stream.next("habitat block")
        if _is_close(line):
            break
        cur = line.cursor()
        index = _parse_indexed(cur, "H")
        cur.expect("LBRACE", "'{' opening the habitat group")
        if cur.peek() and cur.peek().kind == "RBRACE":
            cur.next()
            cur.expect_end()
            groups.append(HabitatGroup(index, ()))
            continue
        cur.expect_end()
        groups.append(_parse_habitat_group(stream, index, line))
    return tuple(groups)


def _parse_habitat(stream: _Stream) -> HabitatSpec:
    intr: tuple[HabitatGroup, ...] = ()
    extr: tuple[HabitatGroup, ...] = ()
    while True:
        line = stream.next("HABITAT block")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("habitat side")
        if key not in ("INTR", "EXTR"):
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in HABITAT (expected INTR or EXTR)",
                line.lineno, line.tokens[0].col)
        cur.expect("LBRACE", "'{'")
        if cur.peek() and cur.peek().kind == "RBRACE":
            cur.next()
            cur.expect_end()
            side: tuple[HabitatGroup, ...] = ()
        else:
            cur.expect_end()
            side = _parse_habitat_side(stream, line)
        if key == "INTR":
            intr = side
        else:
            extr = side
    return HabitatSpec(intr, extr)


def _parse_affordances(stream: _Stream) -> tuple[Affordance, ...]:
    out: list[Affordance] = []
    while True:
        line = stream.next("AFFORD_STR block")
        if _is_close(line):
            break
        cur = line.cursor()
        index = _parse_indexed(cur, "A")
        cur.expect("EQUALS", "'='")
        condition: list[int] = []
        while (cur.peek() and cur.peek().kind == "IDENT" and cur.peek().text == "H"
               and cur.peek(1) and cur.peek(1).kind == "LBRACKET"):
            condition.append(_parse_indexed(cur, "H"))
            tok = cur.peek()
            if tok and tok.kind == "COMMA":
                cur.next()
                continue
        if condition:
            cur.expect("ARROW", "'->' after the habitat condition")
        cur.expect("LBRACKET", "'[' opening the event")
        event = _parse_term(cur)
        cur.expect("RBRACKET", "']' closing the event")
        result = None
        if cur.peek() and cur.peek().kind != "COLON":
            result = _parse_term(cur)
        cur.expect("COLON", "':' before the affordance kind")
        kind = _parse_enum(cur, AffordanceKind, "affordance kind")
        cur.expect_end()
        out.append(Affordance(index, kind, event, tuple(condition), result))
    return tuple(out)


def _parse_embodiment(stream: _Stream) -> Embodiment:
    scale = None
    movable = None
    while True:
        line = stream.next("EMBODIMENT block")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("EMBODIMENT field")
        cur.expect("EQUALS", "'='")
        if key == "SCALE":
            tok = cur.peek()
            prefix = ""
            if tok and tok.kind in ("LT", "GT"):
                cur.next()
                prefix = tok.text
            word = cur.ident("scale token")
            token = prefix + word
            if token not in _SCALE_FROM_TOKEN:
                raise VoxmlSyntaxError(
                    f"unknown scale {token!r} (expected <agent, agent, or >agent)",
                    line.lineno, line.tokens[0].col)
            scale = _SCALE_FROM_TOKEN[token]
        elif key == "MOVABLE":
            word = cur.ident("true or false")
            if word not in ("true", "false"):
                raise VoxmlSyntaxError(
                    f"MOVABLE must be true or false, found {word!r}",
                    line.lineno, line.tokens[0].col)
            movable = word == "true"
        else:
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in EMBODIMENT", line.lineno, line.tokens[0].col)
        cur.expect_end()
    if scale is None or movable is None:
        raise VoxmlSyntaxError(
            "EMBODIMENT requires SCALE and MOVABLE", stream.lines[stream.pos - 1].lineno, 1)
    return Embodiment(scale, movable)


def _parse_indexed_lines(stream: _Stream, letter: str, context: str, item_parser) -> list:
    """Blocks of ``X[i] = ...`` lines (program ARGS and BODY)."""
    out = []
    while True:
        line = stream.next(context)
        if _is_close(line):
            break
        cur = line.cursor()
        _parse_indexed(cur, letter)
        cur.expect("EQUALS", "'='")
        out.append(item_parser(cur))
        cur.expect_end()
    return out


def _parse_object(stream: _Stream, header: _Line) -> ObjectVoxeme:
    lex = typ = habitat = affords = embodiment = None
    while True:
        line = stream.next("object entry")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("object block")
        cur.expect("LBRACE", "'{'")
        empty = bool(cur.peek() and cur.peek().kind == "RBRACE")
        if empty:
            cur.next()
        cur.expect_end()
        if key == "LEX":
            if empty:
                raise VoxmlSyntaxError("LEX block may not be empty", line.lineno, line.tokens[0].col)
            lex = _parse_lex(stream)
        elif key == "TYPE":
            if empty:
                raise VoxmlSyntaxError("TYPE block may not be empty", line.lineno, line.tokens[0].col)
            typ = _parse_object_type(stream)
        elif key == "HABITAT":
            habitat = HabitatSpec() if empty else _parse_habitat(stream)
        elif key == "AFFORD_STR":
            affords = () if empty else _parse_affordances(stream)
        elif key == "EMBODIMENT":
            if empty:
                raise VoxmlSyntaxError("EMBODIMENT block may not be empty", line.lineno, line.tokens[0].col)
            embodiment = _parse_embodiment(stream)
        else:
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in object entry", line.lineno, line.tokens[0].col)
    if lex is None or typ is None or embodiment is None:
        raise VoxmlSyntaxError(
            "object entry requires LEX, TYPE, and EMBODIMENT blocks", header.lineno, header.tokens[0].col)
    return ObjectVoxeme(lex, typ, habitat or HabitatSpec(), affords or (), embodiment)


def _parse_program(stream: _Stream, header: _Line) -> ProgramVoxeme:
    lex = None
    head = None
    args: tuple[ArgSpec, ...] = ()
    body: tuple[Term, ...] = ()
    while True:
        line = stream.next("program entry")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("program block")
        cur.expect("LBRACE", "'{'")
        cur.expect_end()
        if key == "LEX":
            lex = _parse_lex(stream)
        elif key == "TYPE":
            while True:
                inner = stream.next("program TYPE block")
                if _is_close(inner):
                    break
                icur = inner.cursor()
                ikey = icur.ident("program TYPE field")
                if ikey == "HEAD":
                    icur.expect("EQUALS", "'='")
                    head = _parse_enum(icur, ProgramHead, "program head")
                    icur.expect_end()
                elif ikey == "ARGS":
                    icur.expect("LBRACE", "'{'")
                    icur.expect_end()
                    args = tuple(_parse_indexed_lines(stream, "A", "ARGS block", _parse_arg_spec))
                elif ikey == "BODY":
                    icur.expect("LBRACE", "'{'")
                    icur.expect_end()
                    body = tuple(_parse_indexed_lines(stream, "E", "BODY block", _parse_body_term))
                else:
                    raise VoxmlSyntaxError(
                        f"unknown field {ikey!r} in program TYPE", inner.lineno, inner.tokens[0].col)
        else:
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in program entry", line.lineno, line.tokens[0].col)
    if lex is None or head is None:
        raise VoxmlSyntaxError(
            "program entry requires LEX and TYPE.HEAD", header.lineno, header.tokens[0].col)
    return ProgramVoxeme(lex, head, args, body)


def _parse_attribute(stream: _Stream, header: _Line) -> AttributeVoxeme:
    lex = scale = arity = arg = None
    while True:
        line = stream.next("attribute entry")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("attribute block")
        cur.expect("LBRACE", "'{'")
        cur.expect_end()
        if key == "LEX":
            lex = _parse_lex(stream)
        elif key == "TYPE":
            while True:
                inner = stream.next("attribute TYPE block")
                if _is_close(inner):
                    break
                icur = inner.cursor()
                ikey = icur.ident("attribute TYPE field")
                icur.expect("EQUALS", "'='")
                if ikey == "SCALE":
                    tok = icur.expect("IDENT", "scale kind")
                    text = "rational" if tok.text == "ratio" else tok.text
                    try:
                        scale = ScaleKind(text)
                    except ValueError:
                        raise VoxmlSyntaxError(
                            f"unknown scale kind {tok.text!r}", tok.line, tok.col) from None
                elif ikey == "ARITY":
                    arity = _parse_enum(icur, AttributeArity, "arity")
                elif ikey == "ARG":
                    arg = _parse_arg_spec(icur)
                else:
                    raise VoxmlSyntaxError(
                        f"unknown field {ikey!r} in attribute TYPE", inner.lineno, inner.tokens[0].col)
                icur.expect_end()
        else:
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in attribute entry", line.lineno, line.tokens[0].col)
    if lex is None or scale is None or arity is None or arg is None:
        raise VoxmlSyntaxError(
            "attribute entry requires LEX, SCALE, ARITY, and ARG", header.lineno, header.tokens[0].col)
    return AttributeVoxeme(lex, scale, arity, arg)


def _parse_relation(stream: _Stream, header: _Line) -> RelationVoxeme:
    lex = rel_class = value = None
    args: tuple[ArgSpec, ...] = ()
    while True:
        line = stream.next("relation entry")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("relation block")
        cur.expect("LBRACE", "'{'")
        cur.expect_end()
        if key == "LEX":
            lex = _parse_lex(stream)
        elif key == "TYPE":
            while True:
                inner = stream.next("relation TYPE block")
                if _is_close(inner):
                    break
                icur = inner.cursor()
                ikey = icur.ident("relation TYPE field")
                if ikey == "CLASS":
                    icur.expect("EQUALS", "'='")
                    rel_class = _parse_enum(icur, RelationClass, "relation class")
                    icur.expect_end()
                elif ikey == "VALUE":
                    icur.expect("EQUALS", "'='")
                    value = icur.ident("relation value")
                    icur.expect_end()
                elif ikey == "ARGS":
                    icur.expect("LBRACE", "'{'")
                    icur.expect_end()
                    args = tuple(_parse_indexed_lines(stream, "A", "ARGS block", _parse_arg_spec))
                else:
                    raise VoxmlSyntaxError(
                        f"unknown field {ikey!r} in relation TYPE", inner.lineno, inner.tokens[0].col)
        else:
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in relation entry", line.lineno, line.tokens[0].col)
    if lex is None or rel_class is None or value is None:
        raise VoxmlSyntaxError(
            "relation entry requires LEX, CLASS, and VALUE", header.lineno, header.tokens[0].col)
    return RelationVoxeme(lex, rel_class, value, args)


def _parse_referent(cur: _Cursor) -> Referent:
    var = cur.ident("referent variable")
    path = []
    while cur.peek() and cur.peek().kind == "ARROW":
        cur.next()
        path.append(cur.ident("referent path element"))
    return Referent(var, tuple(path))


def _parse_mapping(cur: _Cursor) -> int:
    tok = cur.expect("IDENT", "'dimension'")
    if tok.text != "dimension":
        raise VoxmlSyntaxError(f"expected 'dimension(n):n-k', found {tok.text!r}", tok.line, tok.col)
    cur.expect("LPAREN")
    n1 = cur.ident("dimension variable")
    cur.expect("RPAREN")
    cur.expect("COLON")
    n2 = cur.ident("dimension variable")
    if n1 != n2:
        raise VoxmlSyntaxError(
            f"mapping output must be over the same dimension variable ({n1!r} vs {n2!r})",
            tok.line, tok.col)
    cur.expect("MINUS", "'-'")
    k = int(cur.expect("NUMBER", "reduction amount").text)
    return k


def _parse_orientation(stream: _Stream) -> Orientation:
    space = axis = arity_rule = None
    while True:
        line = stream.next("ORIENTATION block")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("ORIENTATION field")
        cur.expect("EQUALS", "'='")
        if key == "SPACE":
            space = _parse_enum(cur, FunctionSpace, "space")
            cur.expect_end()
        elif key == "AXIS":
            axis = _parse_signed_axis(cur)
            cur.expect_end()
        elif key == "ARITY":
            # Opaque evaluation rule; kept verbatim.
            rest = line.tokens[cur.pos:]
            pieces = []
            prev_end = None
            for t in rest:
                if prev_end is not None and t.col > prev_end:
                    pieces.append(" ")
                pieces.append(t.text)
                prev_end = t.end_col
            arity_rule = "".join(pieces)
            cur.pos = len(line.tokens)
        else:
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in ORIENTATION", line.lineno, line.tokens[0].col)
    if space is None or axis is None or arity_rule is None:
        raise VoxmlSyntaxError(
            "ORIENTATION requires SPACE, AXIS, and ARITY", stream.lines[stream.pos - 1].lineno, 1)
    return Orientation(space, axis, arity_rule)


def _parse_function(stream: _Stream, header: _Line) -> FunctionVoxeme:
    lex = arg = mapping = orientation = None
    referent = None
    while True:
        line = stream.next("function entry")
        if _is_close(line):
            break
        cur = line.cursor()
        key = cur.ident("function block")
        cur.expect("LBRACE", "'{'")
        cur.expect_end()
        if key == "LEX":
            lex = _parse_lex(stream)
        elif key == "TYPE":
            while True:
                inner = stream.next("function TYPE block")
                if _is_close(inner):
                    break
                icur = inner.cursor()
                ikey = icur.ident("function TYPE field")
                if ikey == "ORIENTATION":
                    icur.expect("LBRACE", "'{'")
                    icur.expect_end()
                    orientation = _parse_orientation(stream)
                    continue
                icur.expect("EQUALS", "'='")
                if ikey == "ARG":
                    arg = _parse_arg_spec(icur)
                elif ikey == "REFERENT":
                    referent = _parse_referent(icur)
                elif ikey == "MAPPING":
                    mapping = _parse_mapping(icur)
                else:
                    raise VoxmlSyntaxError(
                        f"unknown field {ikey!r} in function TYPE", inner.lineno, inner.tokens[0].col)
                icur.expect_end()
        else:
            raise VoxmlSyntaxError(
                f"unknown field {key!r} in function entry", line.lineno, line.tokens[0].col)
    if lex is None or arg is None or mapping is None or orientation is None:
        raise VoxmlSyntaxError(
            "function entry requires LEX, ARG, MAPPING, and ORIENTATION",
            header.lineno, header.tokens[0].col)
    return FunctionVoxeme(lex, arg, mapping, orientation, referent)


_ENTRY_PARSERS = {
    "object": _parse_object,
    "program": _parse_program,
    "attribute": _parse_attribute,
    "relation": _parse_relation,
    "function": _parse_function,
}


def _split_entries(text: str) -> list[tuple[int, list[_Line]]]:
    """Top-level entry spans as (start line number, lines)."""
    lines = _lines_of(text)
    spans: list[tuple[int, list[_Line]]] = []
    i = 0
    while i < len(lines):
        line = lines[i]
        first = line.tokens[0]
        if not (first.kind == "IDENT" and first.text in _ENTRY_PARSERS
                and len(line.tokens) >= 2 and line.tokens[1].kind == "LBRACE"):
            kinds = ", ".join(sorted(_ENTRY_PARSERS))
            raise VoxmlSyntaxError(
                f"expected a voxeme entry ({kinds}), found {first.text!r}", first.line, first.col)
        depth = 0
        span = []
        start = i
        while i < len(lines):
            cand = lines[i]
            depth += sum(1 for t in cand.tokens if t.kind == "LBRACE")
            depth -= sum(1 for t in cand.tokens if t.kind == "RBRACE")
            span.append(cand)
            i += 1
            if depth == 0:
                break
        if depth != 0:
            raise VoxmlSyntaxError("unclosed '{' at end of input", lines[start].lineno, 1)
        spans.append((lines[start].lineno, span))
    return spans


def _parse_entry(span: list[_Line]) -> Voxeme:
    header = span[0]
    kind = header.tokens[0].text
    stream = _Stream(span)
    opener = stream.next("entry")
    cur = opener.cursor()
    cur.ident()
    cur.expect("LBRACE", "'{'")
    cur.expect_end()
    return _ENTRY_PARSERS[kind](stream, header)


def parse_voxeme(text: str) -> Voxeme:
    """Parse exactly one voxeme entry."""
    spans = _split_entries(text)
    if not spans:
        raise VoxmlSyntaxError("empty document: expected one voxeme entry", 1, 1)
    if len(spans) > 1:
        raise VoxmlSyntaxError(
            f"expected a single voxeme entry, found {len(spans)}", spans[1][0], 1)
    return _parse_entry(spans[0][1])


def parse_voxicon(text: str) -> "Voxicon":
    """Parse zero or more entries into a voxicon keyed by (pred, kind)."""
    from .voxicon import Voxicon

    voxicon = Voxicon()
    errors: list[tuple[int, VoxmlSyntaxError]] = []
    spans = _split_entries(text)
    for index, (lineno, span) in enumerate(spans):
        try:
            voxeme = _parse_entry(span)
            if voxicon.lookup(voxeme.lex.pred, voxeme.kind) is not None:
                raise VoxmlSyntaxError(
                    f"duplicate entry ({voxeme.lex.pred!r}, {voxeme.kind.value})", lineno, 1)
            voxicon.insert(voxeme)
        except VoxmlSyntaxError as e:
            errors.append((index, e))
    if errors:
        raise VoxiconLoadError(errors)
    return voxicon


# ---------------------------------------------------------------------------
# Serialization

def _fmt_constraint(c) -> str:
    if isinstance(c, Align):
        return f"align({c.object_axis.value}, E_{c.embedding_axis.value})"
    if isinstance(c, FaceLabel):
        return f"{c.label}({c.axis})"
    if isinstance(c, RelativeDim):
        return f"{c.lesser.value} << {c.greater.value}"
    if isinstance(c, PredicateConstraint):
        return print_term(c.term)
    raise TypeError(f"not a habitat constraint: {c!r}")


def _emit_lex(out: list[str], lex: Lex, indent: str) -> None:
    out.append(f"{indent}LEX {{")
    out.append(f"{indent}  PRED = {lex.pred}")
    if len(lex.gl_types) == 1:
        out.append(f"{indent}  TYPE = {lex.gl_types[0]}")
    elif lex.gl_types:
        out.append(f"{indent}  TYPE = {{{', '.join(lex.gl_types)}}}")
    out.append(f"{indent}}}")


def _emit_habitat_side(out: list[str], name: str, groups, indent: str) -> None:
    if not groups:
        out.append(f"{indent}{name} {{}}")
        return
    out.append(f"{indent}{name} {{")
    for g in groups:
        out.append(f"{indent}  H[{g.index}] {{")
        i = 0
        while i < len(g.constraints):
            label = g.constraints[i].label
            run = [g.constraints[i].constraint]
            while i + 1 < len(g.constraints) and g.constraints[i + 1].label == label:
                i += 1
                run.append(g.constraints[i].constraint)
            i += 1
            if len(run) == 1:
                out.append(f"{indent}    {label} = {_fmt_constraint(run[0])}")
            else:
                out.append(f"{indent}    {label} = {{{', '.join(_fmt_constraint(c) for c in run)}}}")
        out.append(f"{indent}  }}")
    out.append(f"{indent}}}")


def _fmt_affordance(a: Affordance) -> str:
    parts = [f"A[{a.index}] ="]
    if a.condition:
        parts.append(", ".join(f"H[{i}]" for i in a.condition))
        parts.append("->")
    parts.append(f"[{print_term(a.event)}]")
    if a.result is not None:
        parts.append(print_term(a.result))
    parts.append(":")
    parts.append(a.kind.value)
    return " ".join(parts)


def serialize_voxeme(voxeme: Voxeme) -> str:
    """Canonical text for a voxeme; parsing it yields an equal value."""
    out: list[str] = [f"{voxeme.kind.value} {{"]
    _emit_lex(out, voxeme.lex, "  ")

    if isinstance(voxeme, ObjectVoxeme):
        t = voxeme.type
        out.append("  TYPE {")
        head = t.head.value + (f"[{t.head_coindex}]" if t.head_coindex is not None else "")
        out.append(f"    HEAD = {head}")
        if t.components:
            out.append(f"    COMPONENTS = {{{', '.join(str(c) for c in t.components)}}}")
        else:
            out.append("    COMPONENTS = nil")
        out.append(f"    CONCAVITY = {t.concavity.value}")
        out.append(f"    ROTATSYM = {{{', '.join(a.value for a in t.rotat_sym)}}}")
        out.append(f"    REFLECTSYM = {{{', '.join(p.value for p in t.reflect_sym)}}}")
        out.append("  }")
        out.append("  HABITAT {")
        _emit_habitat_side(out, "INTR", voxeme.habitat.intrinsic, "    ")
        if voxeme.habitat.extrinsic:
            _emit_habitat_side(out, "EXTR", voxeme.habitat.extrinsic, "    ")
        out.append("  }")
        if voxeme.afford_str:
            out.append("  AFFORD_STR {")
            for a in voxeme.afford_str:
                out.append(f"    {_fmt_affordance(a)}")
            out.append("  }")
        out.append("  EMBODIMENT {")
        out.append(f"    SCALE = {_SCALE_TOKENS[voxeme.embodiment.scale]}")
        out.append(f"    MOVABLE = {'true' if voxeme.embodiment.movable else 'false'}")
        out.append("  }")

    elif isinstance(voxeme, ProgramVoxeme):
        out.append("  TYPE {")
        out.append(f"    HEAD = {voxeme.head.value}")
        if voxeme.args:
            out.append("    ARGS {")
            for i, a in enumerate(voxeme.args, start=1):
                out.append(f"      A[{i}] = {a}")
            out.append("    }")
        if voxeme.body:
            out.append("    BODY {")
            for i, e in enumerate(voxeme.body, start=1):
                out.append(f"      E[{i}] = {print_term(e)}")
            out.append("    }")
        out.append("  }")

    elif isinstance(voxeme, AttributeVoxeme):
        out.append("  TYPE {")
        out.append(f"    SCALE = {voxeme.scale.value}")
        out.append(f"    ARITY = {voxeme.arity.value}")
        out.append(f"    ARG = {voxeme.arg}")
        out.append("  }")

    elif isinstance(voxeme, RelationVoxeme):
        out.append("  TYPE {")
        out.append(f"    CLASS = {voxeme.rel_class.value}")
        out.append(f"    VALUE = {voxeme.value}")
        if voxeme.args:
            out.append("    ARGS {")
            for i, a in enumerate(voxeme.args, start=1):
                out.append(f"      A[{i}] = {a}")
            out.append("    }")
        out.append("  }")

    elif isinstance(voxeme, FunctionVoxeme):
        out.append("  TYPE {")
        out.append(f"    ARG = {voxeme.arg}")
        if voxeme.referent is not None:
            path = " -> ".join((voxeme.referent.var,) + voxeme.referent.path)
            out.append(f"    REFERENT = {path}")
        out.append(f"    MAPPING = dimension(n):n-{voxeme.mapping}")
        out.append("    ORIENTATION {")
        out.append(f"      SPACE = {voxeme.orientation.space.value}")
        out.append(f"      AXIS = {voxeme.orientation.axis}")
        out.append(f"      ARITY = {voxeme.orientation.arity_rule}")
        out.append("    }")
        out.append("  }")

    else:
        raise TypeError(f"not a voxeme: {voxeme!r}")

    out.append("}")
    return "\n".join(out) + "\n"


def serialize_voxicon(voxicon: "Voxicon") -> str:
    return "\n".join(serialize_voxeme(v) for v in voxicon)


# ---------------------------------------------------------------------------
# Scenes

@dataclass(frozen=True)
class InstanceRecord:
    id: str
    pred: str
    position: tuple[float, float, float]
    rotation: tuple[float, float, float]
    extents: tuple[float, float, float]


@dataclass(frozen=True)
class SceneDocument:
    instances: tuple[InstanceRecord, ...]

    def to_state(self) -> SceneState:
        objects = {
            r.id: SceneObject(r.id, r.pred, Vec3.of(r.position), r.rotation, Vec3.of(r.extents))
            for r in self.instances
        }
        return SceneState(objects=objects, facts=frozenset(), tick=0)


def parse_scene(text: str) -> SceneDocument:
    """One ``instance <id> <pred> <position> <rotation> <extents>`` per line."""
    records: list[InstanceRecord] = []
    seen: dict[str, int] = {}
    for line in _lines_of(text):
        cur = line.cursor()
        keyword = cur.ident("'instance'")
        if keyword != "instance":
            raise VoxmlSyntaxError(
                f"expected 'instance', found {keyword!r}", line.lineno, line.tokens[0].col)
        oid = cur.ident("instance id")
        pred = cur.ident("voxeme predicate")
        pos = _parse_vector(cur)
        rot = _parse_vector(cur)
        ext = _parse_vector(cur)
        cur.expect_end()
        if oid in seen:
            raise VoxmlSyntaxError(
                f"duplicate instance id {oid!r} (first on line {seen[oid]})",
                line.lineno, line.tokens[1].col)
        if min(ext) <= 0:
            raise VoxmlSyntaxError(
                f"instance {oid!r} has nonpositive extents", line.lineno, line.tokens[1].col)
        seen[oid] = line.lineno
        records.append(InstanceRecord(oid, pred, pos, rot, ext))
    return SceneDocument(tuple(records))


def serialize_scene(doc: SceneDocument) -> str:
    lines = [
        f"instance {r.id} {r.pred} {format_vector(r.position)} "
        f"{format_vector(r.rotation)} {format_vector(r.extents)}"
        for r in doc.instances
    ]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Logical forms

def parse_logical_form(text: str) -> Term:
    """Parse a predicate-argument logical form such as ``put(apple, on(plate))``."""
    return terms.parse_term(text)


def print_logical_form(term: Term) -> str:
    return print_term(term)


# ---------------------------------------------------------------------------
# Traces

def serialize_trace(trace: "Trace") -> str:
    """One record per transition: tick, action, post-state poses and facts.

    Poses are ordered by instance id, facts lexicographically; repeated runs
    on identical inputs serialize byte-identically.
    """
    records = []
    for tr in trace.transitions:
        state = tr.post
        poses = "; ".join(
            f"{oid} pos={format_vector(obj.position.as_tuple())} "
            f"rot={format_vector(obj.rotation)}"
            for oid, obj in sorted(state.objects.items())
        )
        facts = ", ".join(sorted(print_term(f) for f in state.facts)) or "-"
        records.append(
            f"tick={state.tick} act={print_term(tr.action.term)} | {poses} | facts: {facts}")
    return "\n".join(records) + ("\n" if records else "")
