"""Operational semantics: grounding, program machines, and traces.

Logical forms are grounded against a voxicon and scene innermost-out;
program voxemes are operationalized into deterministic per-tick machines;
running one produces a trace of labeled transitions.  After an event
completes, affordances whose event pattern matches and whose habitat
condition holds contribute their result terms to the final state's facts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .model import (
    AttributeVoxeme,
    FunctionVoxeme,
    ProgramVoxeme,
    Rcc8,
    RelationClass,
    RelationVoxeme,
    VoxemeKind,
)
from .primitives import ACTION_PRIMITIVES, GUARD_PRIMITIVES
from .spatial import (
    DEFAULT_TOLERANCES,
    Region,
    SceneObject,
    SceneState,
    SupportError,
    Tolerances,
    Vec3,
    eval_spatial_function,
    check_habitat_group,
    placement_region,
    rcc8,
    world_box,
)
from .terms import (
    App,
    Atom,
    Num,
    Term,
    VecLit,
    format_number,
    format_vector,
    print_term,
    substitute,
    unify_pattern,
)
from .voxicon import Voxicon


class SimulationError(ValueError):
    pass


class GroundingError(SimulationError):
    pass


class OperationalizeError(SimulationError):
    pass


@dataclass(frozen=True)
class SimParams:
    """Execution parameters; defaults keep runs reproducible."""

    speed: float = 0.1          # world units per tick
    max_ticks: int = 10_000
    at_eps: float = 1e-3        # arrival tolerance for the at() guard
    tolerances: Tolerances = DEFAULT_TOLERANCES


def distance(a: Vec3, b: Vec3) -> float:
    """Euclidean distance between two points."""
    return math.dist(a.as_tuple(), b.as_tuple())


# ---------------------------------------------------------------------------
# Grounding

@dataclass(frozen=True)
class RegionValue:
    """A region produced mid-evaluation, remembering the object it came from."""

    region: Region
    source: str | None = None


GroundValue = object  # instance id (str) | Vec3 | float | RegionValue | Term


@dataclass(frozen=True)
class EvalStep:
    source: str
    result: str

    def __str__(self) -> str:
        return f"{self.source} => {self.result}"


@dataclass
class Grounding:
    term: Term                  # grounded term (locations as coordinates)
    match_term: Term            # like term, but locations named by their source object
    value: GroundValue
    log: list[EvalStep]
    program: ProgramVoxeme | None = None
    binding: dict[str, GroundValue] = field(default_factory=dict)


def _render_value(value: GroundValue, grounded: Term) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, Vec3):
        return format_vector(value.as_tuple())
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, RegionValue):
        r = value.region
        origin = f" (support of {value.source})" if value.source else ""
        return (f"region[{r.dim}D] {format_vector(r.lo.as_tuple())}.."
                f"{format_vector(r.hi.as_tuple())}{origin}")
    return print_term(grounded)


def _agent_instances(voxicon: Voxicon, scene: SceneState) -> list[str]:
    out = []
    for oid in sorted(scene.objects):
        vox = voxicon.lookup(scene.objects[oid].pred, VoxemeKind.OBJECT)
        if vox is not None and "agent" in vox.lex.gl_types:
            out.append(oid)
    return out


class _Grounder:
    def __init__(self, voxicon: Voxicon, scene: SceneState, tol: Tolerances):
        self.voxicon = voxicon
        self.scene = scene
        self.tol = tol
        self.log: list[EvalStep] = []

    def _note(self, source: Term, value: GroundValue, grounded: Term) -> None:
        self.log.append(EvalStep(print_term(source), _render_value(value, grounded)))

    def _resolve_atom(self, atom: Atom) -> str:
        name = atom.name
        if name in self.scene.objects:
            return name
        by_pred = [oid for oid in sorted(self.scene.objects)
                   if self.scene.objects[oid].pred == name]
        if len(by_pred) == 1:
            return by_pred[0]
        if len(by_pred) > 1:
            raise GroundingError(
                f"ambiguous atom {name!r}: instances {', '.join(by_pred)}")
        if self.voxicon.lookup_any(name):
            raise GroundingError(f"no scene instance of voxeme {name!r}")
        raise GroundingError(f"unknown atom {name!r}: no scene instance and no voxeme")

    def _instance_arg(self, pred: str, value: GroundValue) -> SceneObject:
        if not isinstance(value, str):
            raise GroundingError(f"{pred} expects an object, got {value!r}")
        return self.scene.objects[value]

    def eval(self, term: Term) -> tuple[GroundValue, Term, Term]:
        """Returns (value, grounded term, match-form term), logging inner
        evaluations before outer ones."""
        if isinstance(term, Atom):
            oid = self._resolve_atom(term)
            grounded = Atom(oid)
            self._note(term, oid, grounded)
            return oid, grounded, grounded
        if isinstance(term, Num):
            return term.value, term, term
        if isinstance(term, VecLit):
            return Vec3.of(term.value), term, term
        assert isinstance(term, App)

        children = [self.eval(a) for a in term.args]
        values = [c[0] for c in children]
        gargs = [c[1] for c in children]
        margs = [c[2] for c in children]

        pred = term.pred
        if pred == "on":
            if len(values) != 1:
                raise GroundingError(f"'on' takes one argument, got {len(values)}")
            ground_obj = self._instance_arg("on", values[0])
            voxeme = self.voxicon.lookup(ground_obj.pred, VoxemeKind.OBJECT)
            try:
                region = placement_region(ground_obj, voxeme, self.scene, self.tol)
            except SupportError as e:
                raise GroundingError(str(e)) from e
            value = RegionValue(region, ground_obj.id)
            grounded = App(pred, tuple(gargs))
            self._note(term, value, grounded)
            return value, grounded, App(pred, tuple(margs))

        entries = self.voxicon.lookup_any(pred)
        if not entries:
            raise GroundingError(f"unknown predicate {pred!r}")
        voxeme = entries[0]

        if isinstance(voxeme, ProgramVoxeme):
            return self._eval_program(term, voxeme, values, gargs, margs)

        if isinstance(voxeme, FunctionVoxeme):
            if len(values) != 1:
                raise GroundingError(
                    f"function {pred!r} takes 1 argument, got {len(values)}")
            obj = self._instance_arg(pred, values[0])
            region = Region.from_box(world_box(obj))
            out = eval_spatial_function(voxeme, region, obj.rotation)
            value = RegionValue(out, obj.id)
            grounded = App(pred, tuple(gargs))
            self._note(term, value, grounded)
            return value, grounded, App(pred, tuple(margs))

        if isinstance(voxeme, RelationVoxeme):
            if len(values) != len(voxeme.args):
                raise GroundingError(
                    f"relation {pred!r} takes {len(voxeme.args)} arguments, got {len(values)}")
            grounded = App(pred, tuple(gargs))
            if voxeme.rel_class is RelationClass.CONFIG and all(isinstance(v, str) for v in values):
                boxes = [world_box(self.scene.objects[v]) for v in values[:2]]
                value: GroundValue = rcc8(boxes[0], boxes[1], self.tol.contact_eps) is Rcc8(voxeme.value)
            else:
                value = grounded
            self._note(term, value, grounded)
            return value, grounded, App(pred, tuple(margs))

        if isinstance(voxeme, AttributeVoxeme):
            if len(values) != 1:
                raise GroundingError(
                    f"attribute {pred!r} takes 1 argument, got {len(values)}")
            grounded = App(pred, tuple(gargs))
            self._note(term, grounded, grounded)
            return grounded, grounded, App(pred, tuple(margs))

        raise GroundingError(f"cannot evaluate {pred!r} of kind {voxeme.kind.value}")

    def _eval_program(self, term: App, program: ProgramVoxeme, values, gargs, margs):
        params = program.args
        agent_params = [p for p in params if p.tag == "agent"]
        if len(values) == len(params):
            pairs = list(zip(params, values, gargs, margs))
        elif len(values) == len(params) - 1 and len(agent_params) == 1:
            agents = _agent_instances(self.voxicon, self.scene)
            if len(agents) != 1:
                raise GroundingError(
                    f"program {program.lex.pred!r} needs an implicit agent; "
                    f"scene has {len(agents)}")
            rest = iter(zip(values, gargs, margs))
            pairs = []
            for p in params:
                if p.tag == "agent":
                    aid = agents[0]
                    pairs.append((p, aid, Atom(aid), Atom(aid)))
                else:
                    v, g, m = next(rest)
                    pairs.append((p, v, g, m))
        else:
            raise GroundingError(
                f"program {program.lex.pred!r} declares {len(params)} arguments, "
                f"logical form supplies {len(values)}")

        figure: str | None = None
        for p, v, _, _ in pairs:
            if p.tag == "physobj" and isinstance(v, str):
                figure = v
                break

        binding: dict[str, GroundValue] = {}
        out_gargs: dict[int, Term] = {}
        out_margs: dict[int, Term] = {}
        for p, v, g, m in pairs:
            if isinstance(v, RegionValue):
                point = v.region.center
                if p.tag == "location" and figure is not None:
                    fig_box = world_box(self.scene.objects[figure])
                    lift = (fig_box.hi.y - fig_box.lo.y) / 2.0
                    point = Vec3(point.x, point.y + lift, point.z)
                binding[p.var] = point
                g = VecLit(point.as_tuple())
                m = Atom(v.source) if v.source is not None else g
            else:
                binding[p.var] = v
            out_gargs[id(p)] = g
            out_margs[id(p)] = m

        # The logical form keeps its own arity: an implicitly bound agent
        # stays out of the grounded term.
        explicit = [(p, out_gargs[id(p)], out_margs[id(p)]) for p, v, g, m in pairs]
        if len(values) == len(params) - 1:
            explicit = [(p, g, m) for p, g, m in explicit if p.tag != "agent"]
        grounded = App(term.pred, tuple(g for _, g, _ in explicit))
        match = App(term.pred, tuple(m for _, _, m in explicit))
        self._note(term, grounded, grounded)
        value = Grounding(grounded, match, grounded, self.log, program, binding)
        return value, grounded, match


def ground(term: Term, voxicon: Voxicon, scene: SceneState,
           tol: Tolerances = DEFAULT_TOLERANCES) -> Grounding:
    """Ground a logical form: resolve atoms to instances and evaluate inner
    relation/function applications to values, bottom-up and left-to-right.

    The returned log records the evaluation order.
    """
    g = _Grounder(voxicon, scene, tol)
    value, grounded, match = g.eval(term)
    if isinstance(value, Grounding):
        return value
    return Grounding(grounded, match, value, g.log)


# ---------------------------------------------------------------------------
# Program machines

@dataclass
class _PrimPhase:
    act: App


@dataclass
class _WhilePhase:
    guard: App
    act: App


@dataclass
class _CondPhase:
    test: App
    act: App


class ProgramInstance:
    """A deterministic machine realizing a program body phase by phase.

    Primitives consume one tick each; a while phase repeats its action
    while the guard holds and exits without consuming a tick; a
    conditional fires on the first tick its test holds and strands the
    machine (stuck) otherwise, since nothing else can change the state.
    """

    def __init__(self, program: ProgramVoxeme, binding: dict[str, GroundValue],
                 params: SimParams):
        self.program = program
        self.binding = dict(binding)
        self.params = params
        self.stuck = False
        self._phase = 0
        self.phases: list[_PrimPhase | _WhilePhase | _CondPhase] = []
        self.move_target: Vec3 | None = None
        for p in program.args:
            if p.tag == "location" and isinstance(self.binding.get(p.var), Vec3):
                self.move_target = self.binding[p.var]
                break

    @property
    def done(self) -> bool:
        return not self.stuck and self._phase >= len(self.phases)

    @property
    def finished(self) -> bool:
        return self.stuck or self._phase >= len(self.phases)

    def advance(self) -> None:
        self._phase += 1

    @property
    def current(self):
        return self.phases[self._phase]


def _check_guard_term(term: Term, what: str) -> App:
    if not isinstance(term, App) or term.pred not in GUARD_PRIMITIVES:
        raise OperationalizeError(f"unknown {what} {print_term(term)!r}")
    if len(term.args) != GUARD_PRIMITIVES[term.pred]:
        raise OperationalizeError(
            f"{term.pred} takes {GUARD_PRIMITIVES[term.pred]} arguments")
    return term


def _check_action_term(term: Term) -> App:
    if not isinstance(term, App) or term.pred not in ACTION_PRIMITIVES:
        name = print_term(term) if isinstance(term, App) else repr(term)
        raise OperationalizeError(f"unknown primitive {name}")
    if len(term.args) != ACTION_PRIMITIVES[term.pred]:
        raise OperationalizeError(
            f"{term.pred} takes {ACTION_PRIMITIVES[term.pred]} arguments")
    return term


def operationalize(program: ProgramVoxeme, binding: dict[str, GroundValue],
                   params: SimParams = SimParams()) -> ProgramInstance:
    """Compile a program voxeme plus a full argument binding into a machine."""
    for p in program.args:
        if p.var not in binding:
            raise OperationalizeError(
                f"argument {p.var!r}:{p.tag} of {program.lex.pred!r} is unbound")
        v = binding[p.var]
        if p.tag in ("agent", "physobj", "3D") and not isinstance(v, str):
            raise OperationalizeError(
                f"argument {p.var!r}:{p.tag} must be a scene instance, got {v!r}")
        if p.tag == "location" and not isinstance(v, Vec3):
            raise OperationalizeError(
                f"argument {p.var!r}:location must be a coordinate, got {v!r}")

    inst = ProgramInstance(program, binding, params)
    for term in program.body:
        if isinstance(term, App) and term.pred == "while":
            inst.phases.append(_WhilePhase(_check_guard_term(term.args[0], "guard"),
                                           _check_action_term(term.args[1])))
        elif isinstance(term, App) and term.pred == "cond":
            inst.phases.append(_CondPhase(_check_guard_term(term.args[0], "test"),
                                          _check_action_term(term.args[1])))
        else:
            inst.phases.append(_PrimPhase(_check_action_term(term)))
    return inst


# ---------------------------------------------------------------------------
# Stepping

@dataclass(frozen=True)
class Action:
    """A ground primitive action with its tick stamp."""

    term: Term
    tick: int

    def __str__(self) -> str:
        return f"[{self.tick}] {print_term(self.term)}"


@dataclass(frozen=True)
class Transition:
    pre: SceneState
    action: Action
    post: SceneState


class Outcome(str, Enum):
    COMPLETED = "completed"
    TICK_LIMIT = "tick_limit"
    STUCK = "stuck"


@dataclass(frozen=True)
class Trace:
    initial: SceneState
    transitions: tuple[Transition, ...]
    outcome: Outcome
    final: SceneState

    @property
    def actions(self) -> tuple[Term, ...]:
        return tuple(t.action.term for t in self.transitions)


def _resolve(term: Term, inst: ProgramInstance) -> GroundValue:
    if isinstance(term, Atom):
        if term.name in inst.binding:
            return inst.binding[term.name]
        return term.name
    if isinstance(term, VecLit):
        return Vec3.of(term.value)
    if isinstance(term, Num):
        return term.value
    raise SimulationError(f"cannot resolve {print_term(term)!r}")


def _instance_of(value: GroundValue, scene: SceneState, what: str) -> SceneObject:
    if not isinstance(value, str) or value not in scene.objects:
        raise SimulationError(f"{what} does not name a scene instance: {value!r}")
    return scene.objects[value]


def _eval_guard(scene: SceneState, guard: App, inst: ProgramInstance) -> bool:
    values = [_resolve(a, inst) for a in guard.args]
    if guard.pred == "hold":
        fact = App("hold", (Atom(str(values[0])), Atom(str(values[1]))))
        return fact in scene.facts
    if guard.pred == "at":
        obj = _instance_of(values[0], scene, "at() subject")
        target = values[1]
        if not isinstance(target, Vec3):
            raise SimulationError(f"at() target must be a coordinate, got {target!r}")
        return distance(obj.position, target) <= inst.params.at_eps
    # region-connection test, e.g. EC(x, y)
    a = _instance_of(values[0], scene, f"{guard.pred}() argument")
    b = _instance_of(values[1], scene, f"{guard.pred}() argument")
    relation = rcc8(world_box(a), world_box(b), inst.params.tolerances.contact_eps)
    return relation is Rcc8(guard.pred)


def _moved_set(scene: SceneState, mover: str) -> list[str]:
    moved = {mover}
    # attachments move rigidly with their (transitive) holder
    changed = True
    while changed:
        changed = False
        for oid, obj in scene.objects.items():
            if obj.attached_to in moved and oid not in moved:
                moved.add(oid)
                changed = True
    return sorted(moved)


def _move_reference(scene: SceneState, mover: str) -> str:
    held = sorted(oid for oid, obj in scene.objects.items() if obj.attached_to == mover)
    return held[0] if held else mover


def _move_is_complete(scene: SceneState, act: App, inst: ProgramInstance) -> bool:
    if act.pred != "move" or inst.move_target is None:
        return False
    mover = _instance_of(_resolve(act.args[0], inst), scene, "move() subject")
    ref = scene.objects[_move_reference(scene, mover.id)]
    return distance(ref.position, inst.move_target) == 0.0


def _perform(scene: SceneState, act: App, inst: ProgramInstance) -> tuple[SceneState, Action]:
    values = [_resolve(a, inst) for a in act.args]
    tick = scene.tick + 1

    if act.pred == "grasp":
        x = _instance_of(values[0], scene, "grasp() agent")
        y = _instance_of(values[1], scene, "grasp() object")
        fact = App("hold", (Atom(x.id), Atom(y.id)))
        post = scene.with_objects({y.id: replace(y, attached_to=x.id)})
        post = post.with_facts(add=[fact])
        term = App("grasp", (Atom(x.id), Atom(y.id)))
    elif act.pred == "ungrasp":
        x = _instance_of(values[0], scene, "ungrasp() agent")
        y = _instance_of(values[1], scene, "ungrasp() object")
        fact = App("hold", (Atom(x.id), Atom(y.id)))
        post = scene.with_objects({y.id: replace(y, attached_to=None)})
        post = post.with_facts(remove=[fact])
        term = App("ungrasp", (Atom(x.id), Atom(y.id)))
    elif act.pred == "move":
        mover = _instance_of(values[0], scene, "move() subject")
        target = inst.move_target
        ref_id = None
        landing = False
        if target is not None:
            ref_id = _move_reference(scene, mover.id)
            gap = target - scene.objects[ref_id].position
            dist = gap.norm()
            landing = dist <= inst.params.speed
            delta = gap if landing else gap.scaled(inst.params.speed / dist)
            toward = target
        else:
            delta = Vec3(inst.params.speed, 0.0, 0.0)
            toward = mover.position + delta
        updates = {}
        for oid in _moved_set(scene, mover.id):
            obj = scene.objects[oid]
            if landing and oid == ref_id:
                # land bit-exactly on the target, not on target +- rounding
                updates[oid] = replace(obj, position=target)
            else:
                updates[oid] = replace(obj, position=obj.position + delta)
        post = scene.with_objects(updates)
        term = App("move", (Atom(mover.id), App("toward", (VecLit(toward.as_tuple()),))))
    else:  # unreachable: operationalize validated the primitive set
        raise SimulationError(f"unknown primitive {act.pred!r}")

    post = replace(post, tick=tick)
    return post, Action(term, tick)


def step(scene: SceneState, inst: ProgramInstance) -> tuple[SceneState, Action | None]:
    """Advance the machine by one primitive or one guard evaluation.

    Guard evaluations that exit a phase consume no tick and return no
    action; actions advance the tick by exactly one.
    """
    if inst.finished:
        raise SimulationError("machine already finished")
    phase = inst.current
    if isinstance(phase, _PrimPhase):
        post, action = _perform(scene, phase.act, inst)
        inst.advance()
        return post, action
    if isinstance(phase, _WhilePhase):
        if not _eval_guard(scene, phase.guard, inst):
            inst.advance()
            return scene, None
        if _move_is_complete(scene, phase.act, inst):
            inst.advance()
            return scene, None
        post, action = _perform(scene, phase.act, inst)
        return post, action
    assert isinstance(phase, _CondPhase)
    if _eval_guard(scene, phase.test, inst):
        post, action = _perform(scene, phase.act, inst)
        inst.advance()
        return post, action
    # Execution is sequential: a false test can never become true later.
    inst.stuck = True
    return scene, None


# ---------------------------------------------------------------------------
# Affordance firing

def fire_affordances(scene: SceneState, completed_event: Term, voxicon: Voxicon,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> SceneState:
    """Add the result facts of every affordance whose event pattern unifies
    with the completed event and whose habitat condition holds."""
    if not isinstance(completed_event, App):
        return scene
    participants: list[str] = []
    for arg in completed_event.args:
        if isinstance(arg, Atom) and arg.name in scene.objects and arg.name not in participants:
            participants.append(arg.name)

    new_facts: list[Term] = []
    for pid in participants:
        obj = scene.objects[pid]
        voxeme = voxicon.lookup(obj.pred, VoxemeKind.OBJECT)
        if voxeme is None:
            continue
        for aff in voxeme.afford_str:
            binding = unify_pattern(aff.event, completed_event)
            if binding is None:
                continue
            groups = [voxeme.habitat.group(i) for i in aff.condition]
            if any(g is None for g in groups):
                continue
            if not all(check_habitat_group(g, obj, scene, voxeme, tol) for g in groups):
                continue
            if aff.result is not None:
                fact = substitute(aff.result, binding)
                if fact not in new_facts:
                    new_facts.append(fact)
    return scene.with_facts(add=new_facts) if new_facts else scene


# ---------------------------------------------------------------------------
# Running

def run(lf: Term, voxicon: Voxicon, scene: SceneState,
        params: SimParams = SimParams()) -> Trace:
    """Ground a logical form, operationalize its program head, and step the
    machine until completion, a stuck conditional, or the tick limit.

    Identical inputs yield identical traces.
    """
    if params.max_ticks <= 0:
        raise SimulationError("max_ticks must be positive")
    if params.speed <= 0:
        raise SimulationError("speed must be positive")

    grounding = ground(lf, voxicon, scene, params.tolerances)
    if grounding.program is None:
        head = lf.pred if isinstance(lf, App) else print_term(lf)
        raise GroundingError(f"head {head!r} is not a program")

    inst = operationalize(grounding.program, grounding.binding, params)
    transitions: list[Transition] = []
    state = scene
    fired = False
    while True:
        if inst.done:
            outcome = Outcome.COMPLETED
            break
        if inst.stuck:
            outcome = Outcome.STUCK
            break
        if state.tick >= params.max_ticks:
            outcome = Outcome.TICK_LIMIT
            break
        post, action = step(state, inst)
        if action is not None:
            if inst.done:
                post = fire_affordances(post, grounding.match_term, voxicon, params.tolerances)
                fired = True
            transitions.append(Transition(state, action, post))
        state = post

    if outcome is Outcome.COMPLETED and not fired:
        state = fire_affordances(state, grounding.match_term, voxicon, params.tolerances)
    return Trace(scene, tuple(transitions), outcome, state)
