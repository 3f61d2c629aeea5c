"""Voxicon management: lookup, cross-entry linting, and statistics.

A voxicon maps (pred, kind) to a voxeme — a lexeme may name both an
object and a program — and keeps insertion order for listing.  Lookups on
a loaded voxicon are safe concurrently; mutation is single-writer.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .model import (
    AttributeVoxeme,
    FunctionVoxeme,
    ObjectVoxeme,
    PredicateConstraint,
    ProgramVoxeme,
    RelationVoxeme,
    Voxeme,
    VoxemeKind,
)
from .primitives import ACTION_PRIMITIVES, GUARD_PRIMITIVES, KNOWN_PRIMITIVES, KNOWN_TYPE_TAGS
from .terms import App, Atom, Term, is_variable


class Voxicon:
    """Ordered library of voxemes keyed by (pred, kind)."""

    def __init__(self, voxemes: Iterator[Voxeme] | None = None):
        self._entries: dict[tuple[str, VoxemeKind], Voxeme] = {}
        for v in voxemes or ():
            self.insert(v)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Voxeme]:
        return iter(self._entries.values())

    def __contains__(self, key: tuple[str, VoxemeKind]) -> bool:
        return key in self._entries

    def lookup(self, pred: str, kind: VoxemeKind | str) -> Voxeme | None:
        """The entry for (pred, kind), or None; never mutates."""
        return self._entries.get((pred, VoxemeKind(kind)))

    def lookup_any(self, pred: str) -> list[Voxeme]:
        """All entries sharing the predicate, across kinds, in insertion order."""
        return [v for (p, _), v in self._entries.items() if p == pred]

    def insert(self, voxeme: Voxeme) -> None:
        key = (voxeme.lex.pred, voxeme.kind)
        if key in self._entries:
            raise ValueError(f"duplicate voxicon entry {key!r}")
        self._entries[key] = voxeme

    def remove(self, pred: str, kind: VoxemeKind | str) -> Voxeme | None:
        return self._entries.pop((pred, VoxemeKind(kind)), None)


def load_voxicon(path) -> Voxicon:
    from . import io

    with open(path, encoding="utf-8") as fh:
        return io.parse_voxicon(fh.read())


@dataclass(frozen=True)
class LintDiagnostic:
    severity: str  # "error" | "warning"
    pred: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.pred}: {self.path}: {self.message}"


def _event_heads(term: Term) -> set[str]:
    if isinstance(term, App):
        return {term.pred}
    return set()


def _body_application_preds(term: Term) -> set[str]:
    """Leaf application predicates of a program body term (while/cond are
    structural, their parts are visited)."""
    if not isinstance(term, App):
        return set()
    if term.pred in ("while", "cond"):
        out: set[str] = set()
        for a in term.args:
            out |= _body_application_preds(a)
        return out
    return {term.pred}


def lint(voxicon: Voxicon, primitives: frozenset[str] = KNOWN_PRIMITIVES) -> list[LintDiagnostic]:
    """Cross-entry diagnostics over a loaded voxicon.

    Deterministic and order-independent: permuting entries permutes the
    output but preserves the diagnostic multiset.
    """
    diags: list[LintDiagnostic] = []
    program_preds = {v.lex.pred for v in voxicon if isinstance(v, ProgramVoxeme)}
    known_events = primitives | program_preds

    for voxeme in voxicon:
        pred = voxeme.lex.pred
        if isinstance(voxeme, ObjectVoxeme):
            components = {c.name for c in voxeme.type.components}
            for side_name, side in (("INTR", voxeme.habitat.intrinsic),
                                    ("EXTR", voxeme.habitat.extrinsic)):
                for group in side:
                    for lc in group.constraints:
                        if not isinstance(lc.constraint, PredicateConstraint):
                            continue
                        term = lc.constraint.term
                        args = term.args if isinstance(term, App) else ()
                        for a in args:
                            if isinstance(a, Atom) and not is_variable(a) and a.name not in components:
                                diags.append(LintDiagnostic(
                                    "error", pred,
                                    f"HABITAT.{side_name}.H[{group.index}].{lc.label}",
                                    f"undeclared component {a.name!r}"))
            for aff in voxeme.afford_str:
                for head in _event_heads(aff.event):
                    if head not in known_events:
                        diags.append(LintDiagnostic(
                            "warning", pred, f"AFFORD_STR.A[{aff.index}]",
                            f"unknown event predicate {head!r}"))
        elif isinstance(voxeme, ProgramVoxeme):
            for i, term in enumerate(voxeme.body, start=1):
                for p in sorted(_body_application_preds(term)):
                    if p not in known_events:
                        diags.append(LintDiagnostic(
                            "warning", pred, f"TYPE.BODY.E[{i}]",
                            f"unknown body primitive {p!r}"))
            for a in voxeme.args:
                if a.tag not in KNOWN_TYPE_TAGS:
                    diags.append(LintDiagnostic(
                        "warning", pred, "TYPE.ARGS", f"unknown type tag {a.tag!r}"))
        elif isinstance(voxeme, AttributeVoxeme):
            if voxeme.arg.tag not in KNOWN_TYPE_TAGS:
                diags.append(LintDiagnostic(
                    "warning", pred, "TYPE.ARG", f"unknown type tag {voxeme.arg.tag!r}"))
        elif isinstance(voxeme, RelationVoxeme):
            for a in voxeme.args:
                if a.tag not in KNOWN_TYPE_TAGS:
                    diags.append(LintDiagnostic(
                        "warning", pred, "TYPE.ARGS", f"unknown type tag {a.tag!r}"))
        elif isinstance(voxeme, FunctionVoxeme):
            if voxeme.arg.tag not in KNOWN_TYPE_TAGS:
                diags.append(LintDiagnostic(
                    "warning", pred, "TYPE.ARG", f"unknown type tag {voxeme.arg.tag!r}"))
    return diags


def stats(voxicon: Voxicon) -> dict[str, Counter]:
    """Exact counts by kind, head shape, program head, and attribute scale."""
    out = {
        "kind": Counter(),
        "head": Counter(),
        "program_head": Counter(),
        "scale": Counter(),
    }
    for v in voxicon:
        out["kind"][v.kind.value] += 1
        if isinstance(v, ObjectVoxeme):
            out["head"][v.type.head.value] += 1
        elif isinstance(v, ProgramVoxeme):
            out["program_head"][v.head.value] += 1
        elif isinstance(v, AttributeVoxeme):
            out["scale"][v.scale.value] += 1
    return out
