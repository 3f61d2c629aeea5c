"""Interpreter primitive registry.

Program bodies and affordance events may use these symbols without a
voxicon entry of their own: the executable action primitives, the guard
tests evaluated against the scene, and the low-level manipulation
(Gibsonian) action names.  The linter treats all of them as known.
"""

from __future__ import annotations

from .model import Rcc8

# Actions the interpreter can execute, with body arity.
ACTION_PRIMITIVES: dict[str, int] = {
    "grasp": 2,
    "ungrasp": 2,
    "move": 1,
}

# Guards evaluated against the current scene state.
GUARD_PRIMITIVES: dict[str, int] = {
    "hold": 2,
    "at": 2,
    **{r.value: 2 for r in Rcc8},
}

# Manipulation actions named by affordance structures but not (yet)
# realized as executable machines.
GIBSONIAN_PRIMITIVES: dict[str, int] = {
    "touch": 2,
    "lift": 2,
    "turn": 2,
}

# Spatial placement operator consumed during grounding.
SPATIAL_PRIMITIVES: dict[str, int] = {
    "on": 1,
}

KNOWN_PRIMITIVES: frozenset[str] = frozenset(
    {*ACTION_PRIMITIVES, *GUARD_PRIMITIVES, *GIBSONIAN_PRIMITIVES, *SPATIAL_PRIMITIVES}
)

# Semantic type tags with a grounding interpretation.
KNOWN_TYPE_TAGS: frozenset[str] = frozenset(
    {"physobj", "agent", "location", "3D", "artifact"}
)
