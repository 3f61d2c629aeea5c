"""Scene geometry and qualitative spatial reasoning.

Regions are approximated by world-axis-aligned boxes: rotated objects
contribute the enclosing box of their eight rotated corners.  That keeps
every relation here checkable against a brute-force sampling oracle while
still supporting the placement and habitat semantics the interpreter
needs.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .model import (
    Align,
    Axis,
    Concavity,
    FaceLabel,
    FunctionSpace,
    FunctionVoxeme,
    HabitatConstraint,
    HabitatGroup,
    ObjectVoxeme,
    PredicateConstraint,
    Rcc8,
    RelativeDim,
    canonicalize_head,
    primitive_symmetry,
)
from .terms import App, Atom, Term

# Reference height of an in-world agent, in abstract world units.
AGENT_HEIGHT = 1.8


@dataclass(frozen=True)
class Tolerances:
    """Knobs left open by the qualitative semantics; all overridable."""

    contact_eps: float = 1e-6       # world units; boundaries closer count as touching
    align_tol_deg: float = 5.0      # max angular deviation for alignment checks
    dim_ratio: float = 0.25         # a << b holds when extent(a) <= ratio * extent(b)
    concave_depth_fraction: float = 0.5   # support surface depth inside a concavity
    concave_inset_fraction: float = 0.1   # per-side shrink of a concave support patch


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __add__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x + o.x, self.y + o.y, self.z + o.z)

    def __sub__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x - o.x, self.y - o.y, self.z - o.z)

    def scaled(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, o: "Vec3") -> float:
        return self.x * o.x + self.y * o.y + self.z * o.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def __getitem__(self, i: int) -> float:
        return (self.x, self.y, self.z)[i]

    @classmethod
    def of(cls, t) -> "Vec3":
        x, y, z = t
        return cls(float(x), float(y), float(z))


@dataclass(frozen=True)
class Box:
    """Axis-aligned solid box, lo <= hi componentwise."""

    lo: Vec3
    hi: Vec3

    @property
    def center(self) -> Vec3:
        return Vec3((self.lo.x + self.hi.x) / 2, (self.lo.y + self.hi.y) / 2,
                    (self.lo.z + self.hi.z) / 2)

    @property
    def extents(self) -> Vec3:
        return self.hi - self.lo

    def contains_box(self, other: "Box") -> bool:
        return all(self.lo[i] <= other.lo[i] and other.hi[i] <= self.hi[i] for i in range(3))

    def union(self, other: "Box") -> "Box":
        return Box(
            Vec3(min(self.lo.x, other.lo.x), min(self.lo.y, other.lo.y), min(self.lo.z, other.lo.z)),
            Vec3(max(self.hi.x, other.hi.x), max(self.hi.y, other.hi.y), max(self.hi.z, other.hi.z)),
        )

    def inflate(self, margin: float) -> "Box":
        m = Vec3(margin, margin, margin)
        return Box(self.lo - m, self.hi + m)


@dataclass(frozen=True)
class Region:
    """A geometric region of dimensionality 0-3 carried by a box.

    The carrier degenerates along 3 - dim axes: a 2D region is a
    rectangle patch, 1D a segment, 0D a point.
    """

    lo: Vec3
    hi: Vec3
    dim: int

    def __post_init__(self) -> None:
        spans = [self.hi[i] - self.lo[i] for i in range(3)]
        if any(s < 0 for s in spans):
            raise ValueError("region has negative extent")
        nondegenerate = sum(1 for s in spans if s > 0)
        if nondegenerate != self.dim:
            raise ValueError(
                f"carrier has {nondegenerate} nondegenerate axes but dimensionality {self.dim}")

    @property
    def center(self) -> Vec3:
        return Box(self.lo, self.hi).center

    @classmethod
    def from_box(cls, box: Box) -> "Region":
        spans = box.extents
        dim = sum(1 for i in range(3) if spans[i] > 0)
        return cls(box.lo, box.hi, dim)


@dataclass(frozen=True)
class SceneObject:
    id: str
    pred: str
    position: Vec3
    rotation: tuple[float, float, float]  # Euler degrees, applied Z then X then Y
    extents: Vec3
    attached_to: str | None = None


@dataclass(frozen=True)
class SceneState:
    """Objects plus asserted relation facts at a simulation tick."""

    objects: dict[str, SceneObject] = field(default_factory=dict)
    facts: frozenset[Term] = frozenset()
    tick: int = 0

    def __post_init__(self) -> None:
        for oid, obj in self.objects.items():
            if obj.id != oid:
                raise ValueError(f"object keyed {oid!r} carries id {obj.id!r}")
            if min(obj.extents.as_tuple()) <= 0:
                raise ValueError(f"object {oid!r} has nonpositive extents")
        seen: set[str] = set()
        for obj in self.objects.values():
            chain, cur = set(), obj
            while cur.attached_to is not None:
                if cur.attached_to in chain or cur.attached_to == obj.id:
                    raise ValueError(f"attachment cycle through {obj.id!r}")
                chain.add(cur.attached_to)
                nxt = self.objects.get(cur.attached_to)
                if nxt is None:
                    raise ValueError(f"{cur.id!r} attached to missing object {cur.attached_to!r}")
                cur = nxt
        del seen

    def with_objects(self, updated: dict[str, SceneObject]) -> "SceneState":
        objs = dict(self.objects)
        objs.update(updated)
        return replace(self, objects=objs)

    def with_facts(self, add=(), remove=()) -> "SceneState":
        return replace(self, facts=(self.facts - frozenset(remove)) | frozenset(add))


# ---------------------------------------------------------------------------
# Rotation

def _cos_sin_deg(deg: float) -> tuple[float, float]:
    # Exact values at quarter turns so 90-degree poses stay bit-exact.
    r = deg % 360.0
    quarter = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}
    if r in quarter:
        return quarter[r]
    rad = math.radians(deg)
    return math.cos(rad), math.sin(rad)


def rotation_matrix(rotation: tuple[float, float, float]) -> tuple[tuple[float, float, float], ...]:
    """World-frame rotation for Euler degrees applied Z, then X, then Y."""
    rx, ry, rz = rotation
    cx, sx = _cos_sin_deg(rx)
    cy, sy = _cos_sin_deg(ry)
    cz, sz = _cos_sin_deg(rz)
    mz = ((cz, -sz, 0.0), (sz, cz, 0.0), (0.0, 0.0, 1.0))
    mx = ((1.0, 0.0, 0.0), (0.0, cx, -sx), (0.0, sx, cx))
    my = ((cy, 0.0, sy), (0.0, 1.0, 0.0), (-sy, 0.0, cy))

    def mul(a, b):
        return tuple(
            tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
            for i in range(3)
        )

    return mul(my, mul(mx, mz))


def rotate(m, v: Vec3) -> Vec3:
    return Vec3(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )


def world_box(obj: SceneObject) -> Box:
    """Enclosing axis-aligned box of the object's rotated extents."""
    if obj.rotation == (0.0, 0.0, 0.0):
        half = obj.extents.scaled(0.5)
        return Box(obj.position - half, obj.position + half)
    m = rotation_matrix(obj.rotation)
    hx, hy, hz = obj.extents.x / 2, obj.extents.y / 2, obj.extents.z / 2
    lo = [math.inf] * 3
    hi = [-math.inf] * 3
    for sx in (-hx, hx):
        for sy in (-hy, hy):
            for sz in (-hz, hz):
                c = rotate(m, Vec3(sx, sy, sz))
                for i in range(3):
                    lo[i] = min(lo[i], c[i])
                    hi[i] = max(hi[i], c[i])
    return Box(obj.position + Vec3(lo[0], lo[1], lo[2]), obj.position + Vec3(hi[0], hi[1], hi[2]))


# ---------------------------------------------------------------------------
# RCC-8

def rcc8(a: Box, b: Box, eps: float = DEFAULT_TOLERANCES.contact_eps) -> Rcc8:
    """Classify the pair of boxes into exactly one of the eight relations.

    Boundaries within ``eps`` of one another count as touching; EQ requires
    all six face pairs within ``eps``.
    """
    code = kernels.rcc8_codes(
        np.array([a.lo.as_tuple()]), np.array([a.hi.as_tuple()]),
        np.array([b.lo.as_tuple()]), np.array([b.hi.as_tuple()]), eps,
    )[0]
    return kernels.RCC8_CODE_ORDER[code]


def rcc8_batch(alo, ahi, blo, bhi, eps: float = DEFAULT_TOLERANCES.contact_eps) -> list[Rcc8]:
    """Batch variant over (N, 3) corner arrays; uses the active kernel backend."""
    codes = kernels.rcc8_codes(alo, ahi, blo, bhi, eps)
    order = kernels.RCC8_CODE_ORDER
    return [order[c] for c in codes]


# ---------------------------------------------------------------------------
# Spatial functions

class SpatialError(ValueError):
    pass


def eval_spatial_function(fn: FunctionVoxeme, target: Region,
                          rotation: tuple[float, float, float] | None = None) -> Region:
    """Extract the (n-1)-dimensional extremal boundary element of the target
    along the function's signed axis.

    The top of a box is its +Y face; of an upright patch, its +Y edge; of a
    vertical segment, its +Y endpoint.  In object space the axis is first
    carried through the object's rotation and snapped to the dominant
    world axis.
    """
    if target.dim < 1:
        raise SpatialError(f"{fn.lex.pred}: target must have dimensionality >= 1")
    axis_vec = Vec3.of(fn.orientation.axis.vector)
    if fn.orientation.space is FunctionSpace.OBJECT and rotation is not None:
        axis_vec = rotate(rotation_matrix(rotation), axis_vec)
    comps = axis_vec.as_tuple()
    idx = max(range(3), key=lambda i: abs(comps[i]))
    positive = comps[idx] >= 0
    if target.hi[idx] - target.lo[idx] <= 0:
        raise SpatialError(
            f"{fn.lex.pred}: target is degenerate along {'XYZ'[idx]}")
    value = target.hi[idx] if positive else target.lo[idx]
    lo = list(target.lo.as_tuple())
    hi = list(target.hi.as_tuple())
    lo[idx] = hi[idx] = value
    return Region(Vec3(*lo), Vec3(*hi), target.dim - 1)


# ---------------------------------------------------------------------------
# Habitat evaluation

def _angle_deg(a: Vec3, b: Vec3) -> float:
    d = a.dot(b) / (a.norm() * b.norm())
    return math.degrees(math.acos(max(-1.0, min(1.0, d))))


def _axis_unit(axis: Axis) -> Vec3:
    return Vec3(*(1.0 if i == axis.index else 0.0 for i in range(3)))


def check_habitat(constraint: HabitatConstraint, obj: SceneObject, scene: SceneState,
                  voxeme: ObjectVoxeme | None = None,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Evaluate one habitat constraint for an object in a scene."""
    if isinstance(constraint, Align):
        m = rotation_matrix(obj.rotation)
        rotated = rotate(m, _axis_unit(constraint.object_axis))
        return _angle_deg(rotated, _axis_unit(constraint.embedding_axis)) <= tol.align_tol_deg
    if isinstance(constraint, FaceLabel):
        # The labeled face's outward normal is the signed axis in object
        # space; the face must point along the same signed world axis.
        m = rotation_matrix(obj.rotation)
        rotated = rotate(m, Vec3.of(constraint.axis.vector))
        return _angle_deg(rotated, Vec3.of(constraint.axis.vector)) <= tol.align_tol_deg
    if isinstance(constraint, RelativeDim):
        ext = obj.extents
        return ext[constraint.lesser.index] <= tol.dim_ratio * ext[constraint.greater.index]
    if isinstance(constraint, PredicateConstraint):
        components = {c.name for c in voxeme.type.components} if voxeme else set()

        def qualify(t: Term) -> Term:
            if isinstance(t, Atom) and t.name in components:
                return Atom(f"{obj.id}.{t.name}")
            if isinstance(t, App):
                return App(t.pred, tuple(qualify(a) for a in t.args))
            return t

        return qualify(constraint.term) in scene.facts
    raise TypeError(f"not a habitat constraint: {constraint!r}")


def check_habitat_group(group: HabitatGroup, obj: SceneObject, scene: SceneState,
                        voxeme: ObjectVoxeme | None = None,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return all(check_habitat(lc.constraint, obj, scene, voxeme, tol) for lc in group.constraints)


# ---------------------------------------------------------------------------
# Symmetry confirmation

@dataclass(frozen=True)
class SymmetryFinding:
    claim: str      # "rotational" | "reflection"
    value: str      # axis or plane token
    supported: bool
    note: str


@dataclass(frozen=True)
class SymmetryReport:
    pred: str
    findings: tuple[SymmetryFinding, ...]

    @property
    def all_supported(self) -> bool:
        return all(f.supported for f in self.findings)

    @property
    def unsupported(self) -> tuple[SymmetryFinding, ...]:
        return tuple(f for f in self.findings if not f.supported)


def check_symmetry_claims(voxeme: ObjectVoxeme,
                          extents: tuple[float, float, float] = (1.0, 1.0, 1.0),
                          tol: float = 1e-9) -> SymmetryReport:
    """Confirm declared symmetry sets against the head-shape box proxy.

    Rotational axes are confirmed under half turns (quarter turns are noted
    when the orthogonal extents agree within ``tol``); reflection planes by
    extent mirror-equality.  Claims outside what the primitive supports are
    reported unsupported.
    """
    head = canonicalize_head(voxeme.type.head, voxeme.type.reflect_sym)
    max_rot, max_ref = primitive_symmetry(head)
    findings: list[SymmetryFinding] = []

    for axis in voxeme.type.rotat_sym:
        if axis not in max_rot:
            findings.append(SymmetryFinding(
                "rotational", axis.value, False,
                f"{head.value} does not keep its form under rotation about {axis.value}"))
            continue
        others = [extents[i] for i in range(3) if i != axis.index]
        if abs(others[0] - others[1]) <= tol:
            note = "box proxy invariant under quarter and half turns"
        else:
            note = "box proxy invariant under half turns"
        findings.append(SymmetryFinding("rotational", axis.value, True, note))

    for plane in voxeme.type.reflect_sym:
        if plane not in max_ref:
            findings.append(SymmetryFinding(
                "reflection", plane.value, False,
                f"{head.value} mirrored across {plane.value} differs from the original"))
            continue
        findings.append(SymmetryFinding(
            "reflection", plane.value, True, "box proxy extents mirror-equal"))

    return SymmetryReport(voxeme.lex.pred, tuple(findings))


# ---------------------------------------------------------------------------
# Placement

class SupportError(ValueError):
    """The ground object offers no upward-facing support in its current pose."""


def placement_region(ground: SceneObject, voxeme: ObjectVoxeme | None,
                     scene: SceneState,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> Region:
    """The horizontal patch where things placed on the ground object rest.

    Concave grounds support on the interior bottom of the concavity: the
    top face lowered by the depth fraction of the Y extent and shrunk by
    the inset fraction per side.  Flat and convex grounds support on the
    +Y face of the world box.  Raises SupportError when the ground's
    up-alignment habitat fails under its current rotation.
    """
    up = Align(Axis.Y, Axis.Y)
    if voxeme is not None:
        for g in voxeme.habitat.intrinsic:
            for lc in g.constraints:
                if isinstance(lc.constraint, Align) and lc.constraint.embedding_axis is Axis.Y:
                    up = lc.constraint
    if not check_habitat(up, ground, scene, voxeme, tol):
        raise SupportError(f"support habitat unsatisfied for {ground.id!r}")

    box = world_box(ground)
    concavity = voxeme.type.concavity if voxeme is not None else Concavity.FLAT
    if concavity is Concavity.CONCAVE:
        depth = tol.concave_depth_fraction * (box.hi.y - box.lo.y)
        y = box.hi.y - depth
        inset_x = tol.concave_inset_fraction * (box.hi.x - box.lo.x)
        inset_z = tol.concave_inset_fraction * (box.hi.z - box.lo.z)
        return Region(Vec3(box.lo.x + inset_x, y, box.lo.z + inset_z),
                      Vec3(box.hi.x - inset_x, y, box.hi.z - inset_z), 2)
    return Region(Vec3(box.lo.x, box.hi.y, box.lo.z), Vec3(box.hi.x, box.hi.y, box.hi.z), 2)


# ---------------------------------------------------------------------------
# Embedding space

def minimal_embedding_space(objects, margin: float = 0.0) -> Box:
    """Smallest axis-aligned box containing every object, inflated by margin."""
    objects = list(objects)
    if not objects:
        raise ValueError("minimal embedding space of an empty scene is undefined")
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    box = world_box(objects[0])
    for obj in objects[1:]:
        box = box.union(world_box(obj))
    return box.inflate(margin)


def classify_embodiment_scale(height: float) -> str:
    """Qualitative scale of an object of the given height next to the
    reference agent (height ratio thirds: below 1/3, within [1/3, 3), above)."""
    ratio = height / AGENT_HEIGHT
    if ratio < 1.0 / 3.0:
        return "smaller_than_agent"
    if ratio < 3.0:
        return "agent_sized"
    return "larger_than_agent"
