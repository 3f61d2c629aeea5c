"""voxml: visual object concept modeling and simulation.

A validated data model and text serialization for voxemes (objects,
programs, attributes, relations, spatial functions), voxicon tooling,
box-based qualitative spatial reasoning, and an operational interpreter
that grounds logical forms over a 3D scene and emits transition traces.
"""

from .interpreter import (
    Action,
    Grounding,
    GroundingError,
    OperationalizeError,
    Outcome,
    SimParams,
    SimulationError,
    Trace,
    Transition,
    distance,
    fire_affordances,
    ground,
    operationalize,
    run,
    step,
)
from .io import (
    VoxiconLoadError,
    VoxmlSyntaxError,
    parse_logical_form,
    parse_scene,
    parse_voxeme,
    parse_voxicon,
    print_logical_form,
    serialize_scene,
    serialize_trace,
    serialize_voxeme,
    serialize_voxicon,
)
from .model import (
    AttributeVoxeme,
    FunctionVoxeme,
    HeadShape,
    ObjectVoxeme,
    ProgramVoxeme,
    Rcc8,
    RelationVoxeme,
    ValidationReport,
    Voxeme,
    VoxemeKind,
    canonicalize_head,
    primitive_symmetry,
    validate,
)
from .spatial import (
    Box,
    Region,
    SceneObject,
    SceneState,
    Tolerances,
    Vec3,
    check_habitat,
    check_symmetry_claims,
    eval_spatial_function,
    minimal_embedding_space,
    placement_region,
    rcc8,
    rcc8_batch,
    world_box,
)
from .terms import App, Atom, Num, Term, TermSyntaxError, VecLit, parse_term, print_term
from .voxicon import Voxicon, lint, load_voxicon, stats

__version__ = "0.1.0"
