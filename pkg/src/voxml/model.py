"""Voxeme data model.

Five entity kinds — objects, programs, attributes, relations, and spatial
functions — share a lexical block and differ in their type structure.  All
types here are frozen dataclasses: safe to share across threads, validated
by the pure :func:`validate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .terms import App, Atom, Term, is_variable, variables


class VoxemeKind(str, Enum):
    OBJECT = "object"
    PROGRAM = "program"
    ATTRIBUTE = "attribute"
    RELATION = "relation"
    FUNCTION = "function"


class HeadShape(str, Enum):
    """The closed set of geometric primitives usable as an object HEAD."""

    PRISMATOID = "prismatoid"
    PYRAMID = "pyramid"
    WEDGE = "wedge"
    PARALLELEPIPED = "parallelepiped"
    CUPOLA = "cupola"
    FRUSTUM = "frustum"
    CYLINDROID = "cylindroid"
    ELLIPSOID = "ellipsoid"
    HEMIELLIPSOID = "hemiellipsoid"
    BIPYRAMID = "bipyramid"
    RECTANGULAR_PRISM = "rectangular_prism"
    TOROID = "toroid"
    SHEET = "sheet"


class Concavity(str, Enum):
    CONCAVE = "concave"
    FLAT = "flat"
    CONVEX = "convex"


class Axis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def index(self) -> int:
        return "XYZ".index(self.value)


class Plane(str, Enum):
    """Reflection planes spanned by two world axes."""

    XY = "XY"
    XZ = "XZ"
    YZ = "YZ"

    @property
    def normal(self) -> Axis:
        return {Plane.XY: Axis.Z, Plane.XZ: Axis.Y, Plane.YZ: Axis.X}[self]


@dataclass(frozen=True)
class SignedAxis:
    axis: Axis
    positive: bool = True

    def __str__(self) -> str:
        return ("+" if self.positive else "-") + self.axis.value

    @classmethod
    def parse(cls, token: str) -> "SignedAxis":
        sign = True
        if token and token[0] in "+-":
            sign = token[0] == "+"
            token = token[1:]
        return cls(Axis(token), sign)

    @property
    def vector(self) -> tuple[float, float, float]:
        v = [0.0, 0.0, 0.0]
        v[self.axis.index] = 1.0 if self.positive else -1.0
        return (v[0], v[1], v[2])


class ProgramHead(str, Enum):
    STATE = "state"
    PROCESS = "process"
    TRANSITION = "transition"
    ASSIGNMENT = "assignment"
    TEST = "test"


class ScaleKind(str, Enum):
    NOMINAL = "nominal"
    BINARY = "binary"
    ORDINAL = "ordinal"
    INTERVAL = "interval"
    RATIONAL = "rational"


class AttributeArity(str, Enum):
    TRANSITIVE = "transitive"
    INTRANSITIVE = "intransitive"


class RelationClass(str, Enum):
    CONFIG = "config"
    FORCE_DYNAMIC = "force_dynamic"


class Rcc8(str, Enum):
    """The eight jointly exhaustive, pairwise disjoint region relations."""

    DC = "DC"
    EC = "EC"
    PO = "PO"
    TPP = "TPP"
    NTPP = "NTPP"
    TPPI = "TPPi"
    NTPPI = "NTPPi"
    EQ = "EQ"

    def converse(self) -> "Rcc8":
        swap = {
            Rcc8.TPP: Rcc8.TPPI,
            Rcc8.TPPI: Rcc8.TPP,
            Rcc8.NTPP: Rcc8.NTPPI,
            Rcc8.NTPPI: Rcc8.NTPP,
        }
        return swap.get(self, self)


class EmbodimentScale(str, Enum):
    SMALLER_THAN_AGENT = "smaller_than_agent"
    AGENT_SIZED = "agent_sized"
    LARGER_THAN_AGENT = "larger_than_agent"


class FunctionSpace(str, Enum):
    WORLD = "world"
    OBJECT = "object"


class AffordanceKind(str, Enum):
    GIBSONIAN = "gibsonian"
    TELIC = "telic"


# ---------------------------------------------------------------------------
# Structures

@dataclass(frozen=True)
class Lex:
    """Lexical block: the predicate lexeme plus its semantic type tags."""

    pred: str
    gl_types: tuple[str, ...] = ()


@dataclass(frozen=True)
class Component:
    name: str
    coindex: int | None = None
    plural: bool = False

    def __str__(self) -> str:
        s = self.name
        if self.coindex is not None:
            s += f"[{self.coindex}]"
        if self.plural:
            s += "+"
        return s


@dataclass(frozen=True)
class ObjectTypeStructure:
    head: HeadShape
    head_coindex: int | None = None
    components: tuple[Component, ...] = ()
    concavity: Concavity = Concavity.FLAT
    rotat_sym: tuple[Axis, ...] = ()
    reflect_sym: tuple[Plane, ...] = ()


@dataclass(frozen=True)
class Align:
    """Alignment of an object dimension with an embedding-space dimension."""

    object_axis: Axis
    embedding_axis: Axis


@dataclass(frozen=True)
class FaceLabel:
    """An intrinsic face named by a lexeme, e.g. front(+Z) or top(+Y)."""

    label: str
    axis: SignedAxis


@dataclass(frozen=True)
class RelativeDim:
    """Dimensional dominance: extent(lesser) must be well below extent(greater)."""

    lesser: Axis
    greater: Axis


@dataclass(frozen=True)
class PredicateConstraint:
    """A condition over the object's components, checked against scene facts."""

    term: Term


HabitatConstraint = Union[Align, FaceLabel, RelativeDim, PredicateConstraint]


@dataclass(frozen=True)
class LabeledConstraint:
    """A habitat constraint with the key it was written under (UP, TOP, CONSTR...)."""

    label: str
    constraint: HabitatConstraint


@dataclass(frozen=True)
class HabitatGroup:
    index: int
    constraints: tuple[LabeledConstraint, ...] = ()


@dataclass(frozen=True)
class HabitatSpec:
    intrinsic: tuple[HabitatGroup, ...] = ()
    extrinsic: tuple[HabitatGroup, ...] = ()

    def group(self, index: int) -> HabitatGroup | None:
        for g in self.intrinsic + self.extrinsic:
            if g.index == index:
                return g
        return None

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(g.index for g in self.intrinsic + self.extrinsic)


@dataclass(frozen=True)
class Affordance:
    """condition -> [event] result, indexed within the owning voxeme."""

    index: int
    kind: AffordanceKind
    event: Term
    condition: tuple[int, ...] = ()  # habitat indices, conjunction
    result: Term | None = None


@dataclass(frozen=True)
class Embodiment:
    scale: EmbodimentScale
    movable: bool


@dataclass(frozen=True)
class ArgSpec:
    var: str
    tag: str

    def __str__(self) -> str:
        return f"{self.var}:{self.tag}"


@dataclass(frozen=True)
class Referent:
    """Path into the argument voxeme (empty path = the whole voxeme)."""

    var: str
    path: tuple[str, ...] = ()


@dataclass(frozen=True)
class Orientation:
    space: FunctionSpace
    axis: SignedAxis
    arity_rule: str


@dataclass(frozen=True)
class ObjectVoxeme:
    lex: Lex
    type: ObjectTypeStructure
    habitat: HabitatSpec = HabitatSpec()
    afford_str: tuple[Affordance, ...] = ()
    embodiment: Embodiment = Embodiment(EmbodimentScale.AGENT_SIZED, True)

    kind = VoxemeKind.OBJECT


@dataclass(frozen=True)
class ProgramVoxeme:
    lex: Lex
    head: ProgramHead
    args: tuple[ArgSpec, ...] = ()
    body: tuple[Term, ...] = ()

    kind = VoxemeKind.PROGRAM


@dataclass(frozen=True)
class AttributeVoxeme:
    lex: Lex
    scale: ScaleKind
    arity: AttributeArity
    arg: ArgSpec

    kind = VoxemeKind.ATTRIBUTE


@dataclass(frozen=True)
class RelationVoxeme:
    lex: Lex
    rel_class: RelationClass
    value: str
    args: tuple[ArgSpec, ...] = ()

    kind = VoxemeKind.RELATION


@dataclass(frozen=True)
class FunctionVoxeme:
    lex: Lex
    arg: ArgSpec
    mapping: int  # dimension reduction: output dim = input dim - mapping
    orientation: Orientation
    referent: Referent | None = None

    kind = VoxemeKind.FUNCTION


Voxeme = Union[ObjectVoxeme, ProgramVoxeme, AttributeVoxeme, RelationVoxeme, FunctionVoxeme]


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    pred: str
    issues: tuple[ValidationIssue, ...]

    @property
    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    @property
    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors


def _dups(items) -> list:
    seen, out = set(), []
    for x in items:
        if x in seen and x not in out:
            out.append(x)
        seen.add(x)
    return out


def _check_body_term(t: Term, declared: set[str], path: str, issues: list[ValidationIssue]) -> None:
    if isinstance(t, Atom):
        if is_variable(t) and t.name not in declared:
            issues.append(ValidationIssue("error", path, f"unbound variable '{t.name}'"))
        return
    if isinstance(t, App):
        if t.pred in ("while", "cond") and len(t.args) != 2:
            issues.append(ValidationIssue(
                "error", path, f"'{t.pred}' takes a test and an action, got {len(t.args)} arguments"))
        for a in t.args:
            _check_body_term(a, declared, path, issues)


def validate(voxeme: Voxeme) -> ValidationReport:
    """Check structural invariants; never raises.

    The report carries errors (invariant violations) and warnings
    (elided-but-expected blocks such as extrinsic habitats).
    """
    issues: list[ValidationIssue] = []

    if not voxeme.lex.pred:
        issues.append(ValidationIssue("error", "LEX.PRED", "predicate lexeme is empty"))
    if voxeme.kind in (VoxemeKind.OBJECT, VoxemeKind.PROGRAM) and not voxeme.lex.gl_types:
        issues.append(ValidationIssue("error", "LEX.TYPE", "semantic type tags required"))

    if isinstance(voxeme, ObjectVoxeme):
        t = voxeme.type
        if t.head_coindex is not None:
            matching = [c for c in t.components if c.coindex == t.head_coindex]
            if len(matching) != 1:
                issues.append(ValidationIssue(
                    "error", "TYPE.HEAD",
                    f"head coindex [{t.head_coindex}] resolves to {len(matching)} components, expected exactly 1"))
        for axis in _dups(t.rotat_sym):
            issues.append(ValidationIssue("error", "TYPE.ROTATSYM", f"duplicate symmetry axis {axis.value}"))
        for plane in _dups(t.reflect_sym):
            issues.append(ValidationIssue("error", "TYPE.REFLECTSYM", f"duplicate symmetry plane {plane.value}"))
        for name in _dups(c.name for c in t.components):
            issues.append(ValidationIssue("error", "TYPE.COMPONENTS", f"duplicate component '{name}'"))

        hab = voxeme.habitat
        for idx in _dups(hab.indices):
            issues.append(ValidationIssue("error", "HABITAT", f"duplicate habitat index H[{idx}]"))
        if not hab.extrinsic:
            issues.append(ValidationIssue("warning", "HABITAT.EXTR", "extrinsic habitats elided"))

        declared_indices = set(hab.indices)
        for aff in voxeme.afford_str:
            apath = f"AFFORD_STR.A[{aff.index}]"
            for ref in aff.condition:
                if ref not in declared_indices:
                    issues.append(ValidationIssue("error", apath, f"unresolved habitat reference H[{ref}]"))
            if aff.result is not None:
                loose = variables(aff.result) - variables(aff.event)
                for v in sorted(loose):
                    issues.append(ValidationIssue(
                        "error", apath, f"result variable '{v}' does not appear in the event"))
        for idx in _dups(a.index for a in voxeme.afford_str):
            issues.append(ValidationIssue("error", "AFFORD_STR", f"duplicate affordance index A[{idx}]"))

    elif isinstance(voxeme, ProgramVoxeme):
        if voxeme.head in (ProgramHead.PROCESS, ProgramHead.TRANSITION) and not voxeme.body:
            issues.append(ValidationIssue(
                "error", "TYPE.BODY", f"{voxeme.head.value} program requires a nonempty body"))
        for var in _dups(a.var for a in voxeme.args):
            issues.append(ValidationIssue("error", "TYPE.ARGS", f"duplicate argument variable '{var}'"))
        declared = {a.var for a in voxeme.args}
        for i, term in enumerate(voxeme.body, start=1):
            _check_body_term(term, declared, f"TYPE.BODY.E[{i}]", issues)

    elif isinstance(voxeme, RelationVoxeme):
        if len(voxeme.args) < 2:
            issues.append(ValidationIssue("error", "TYPE.ARGS", "relations require arity >= 2"))
        if voxeme.rel_class is RelationClass.CONFIG:
            try:
                Rcc8(voxeme.value)
            except ValueError:
                issues.append(ValidationIssue(
                    "error", "TYPE.VALUE", f"'{voxeme.value}' is not a region-connection value"))

    elif isinstance(voxeme, FunctionVoxeme):
        if voxeme.mapping != 1:
            issues.append(ValidationIssue(
                "error", "TYPE.MAPPING",
                f"mapping must reduce dimension by exactly 1, got n-{voxeme.mapping}"))
        if voxeme.referent is not None and voxeme.referent.var != voxeme.arg.var:
            issues.append(ValidationIssue(
                "error", "TYPE.REFERENT",
                f"referent variable '{voxeme.referent.var}' is not the declared argument"))

    return ValidationReport(voxeme.lex.pred, tuple(issues))


# ---------------------------------------------------------------------------
# Head-shape axioms

def canonicalize_head(head: HeadShape, reflect_sym) -> HeadShape:
    """A parallelepiped with at least two reflection planes is the same
    primitive as a rectangular prism; rewrite it so reasoners can unify
    the two spellings.  Idempotent."""
    if head is HeadShape.PARALLELEPIPED and len(set(reflect_sym)) >= 2:
        return HeadShape.RECTANGULAR_PRISM
    return head


_FULL_ROT = frozenset({Axis.X, Axis.Y, Axis.Z})
_FULL_REF = frozenset({Plane.XY, Plane.XZ, Plane.YZ})
# Primitives with a distinguished upright structure (apex, dome, thin top
# face, slope) lose their identity when turned over; their symmetries are
# confined to the vertical axis and the planes containing it.
_UPRIGHT = (frozenset({Axis.Y}), frozenset({Plane.XY, Plane.YZ}))

_PRIMITIVE_SYMMETRY: dict[HeadShape, tuple[frozenset[Axis], frozenset[Plane]]] = {
    HeadShape.PRISMATOID: _UPRIGHT,
    HeadShape.PYRAMID: _UPRIGHT,
    HeadShape.WEDGE: (frozenset(), frozenset({Plane.YZ})),
    HeadShape.PARALLELEPIPED: (frozenset({Axis.Y}), frozenset({Plane.XZ})),
    HeadShape.CUPOLA: _UPRIGHT,
    HeadShape.FRUSTUM: _UPRIGHT,
    HeadShape.CYLINDROID: (_FULL_ROT, _FULL_REF),
    HeadShape.ELLIPSOID: (_FULL_ROT, _FULL_REF),
    HeadShape.HEMIELLIPSOID: _UPRIGHT,
    HeadShape.BIPYRAMID: (frozenset({Axis.Y}), _FULL_REF),
    HeadShape.RECTANGULAR_PRISM: (_FULL_ROT, _FULL_REF),
    HeadShape.TOROID: (_FULL_ROT, _FULL_REF),
    HeadShape.SHEET: _UPRIGHT,
}

# Same split, used when confirming claims against scene extents: oriented
# primitives are compared with their top face tracked through the motion.
ORIENTED_HEADS = frozenset(
    h for h, sym in _PRIMITIVE_SYMMETRY.items() if sym == _UPRIGHT or h is HeadShape.WEDGE
)


def primitive_symmetry(head: HeadShape) -> tuple[frozenset[Axis], frozenset[Plane]]:
    """Maximal rotational axes and reflection planes the primitive supports
    in its canonical world-grounded orientation.  A voxeme's declared
    symmetry sets must be subsets of these."""
    return _PRIMITIVE_SYMMETRY[head]
