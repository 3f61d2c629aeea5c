"""Independent oracles the test suite checks the library against.

These deliberately avoid the library's own reasoning paths: region
relations come from brute-force point sampling of interiors and closures
on a grid, and primitive symmetries come from enumerating quarter- and
half-turn rotations of an (optionally oriented) box proxy.
"""

from __future__ import annotations

import itertools

import numpy as np

RCC8_NAMES = ("DC", "EC", "PO", "TPP", "NTPP", "TPPi", "NTPPi", "EQ")


def grid_points(lo: float, hi: float, step: float) -> np.ndarray:
    xs = np.arange(lo, hi + step / 2, step)
    return np.stack(np.meshgrid(xs, xs, xs, indexing="ij"), axis=-1).reshape(-1, 3)


def _classify(closures_meet, interiors_meet, a_in_b, b_in_a, a_on_bd_b, b_on_bd_a) -> str:
    if not closures_meet:
        return "DC"
    if not interiors_meet:
        return "EC"
    if a_in_b and b_in_a:
        return "EQ"
    if a_in_b:
        return "TPP" if a_on_bd_b else "NTPP"
    if b_in_a:
        return "TPPi" if b_on_bd_a else "NTPPi"
    return "PO"


def sampling_rcc8(a_lo, a_hi, b_lo, b_hi, points: np.ndarray) -> str:
    """Point-sampling relation of two boxes.

    The grid must hit every box boundary exactly (e.g. half-integer grid
    for integer boxes) for the answer to be reliable.
    """
    a_lo, a_hi = np.asarray(a_lo, float), np.asarray(a_hi, float)
    b_lo, b_hi = np.asarray(b_lo, float), np.asarray(b_hi, float)
    int_a = np.all((points > a_lo) & (points < a_hi), axis=1)
    cl_a = np.all((points >= a_lo) & (points <= a_hi), axis=1)
    int_b = np.all((points > b_lo) & (points < b_hi), axis=1)
    cl_b = np.all((points >= b_lo) & (points <= b_hi), axis=1)
    return _classify(
        bool(np.any(cl_a & cl_b)),
        bool(np.any(int_a & int_b)),
        not np.any(cl_a & ~cl_b),
        not np.any(cl_b & ~cl_a),
        bool(np.any(cl_a & cl_b & ~int_b)),
        bool(np.any(cl_b & cl_a & ~int_a)),
    )


def integer_boxes(limit: int = 3) -> list[tuple[tuple, tuple]]:
    """All boxes with integer corner coordinates in [0, limit], positive extents."""
    intervals = [(lo, hi) for lo in range(limit + 1) for hi in range(lo + 1, limit + 1)]
    boxes = []
    for ix, iy, iz in itertools.product(intervals, repeat=3):
        boxes.append(((ix[0], iy[0], iz[0]), (ix[1], iy[1], iz[1])))
    return boxes


def sampling_rcc8_all_pairs(boxes, points: np.ndarray) -> list[str]:
    """Sampling relation for every ordered box pair, via membership masks."""
    lo = np.array([b[0] for b in boxes], float)
    hi = np.array([b[1] for b in boxes], float)
    # masks: (n boxes, n points)
    interior = np.all((points[None, :, :] > lo[:, None, :]) & (points[None, :, :] < hi[:, None, :]), axis=2)
    closure = np.all((points[None, :, :] >= lo[:, None, :]) & (points[None, :, :] <= hi[:, None, :]), axis=2)
    cl = closure.astype(np.int32)
    inn = interior.astype(np.int32)
    boundary = (closure & ~interior).astype(np.int32)

    common_cl = cl @ cl.T
    common_int = inn @ inn.T
    outside = cl @ (1 - cl).T          # points of a's closure outside b's closure
    on_boundary = cl @ boundary.T      # points of a's closure on b's boundary

    n = len(boxes)
    out = []
    for i in range(n):
        for j in range(n):
            out.append(_classify(
                common_cl[i, j] > 0,
                common_int[i, j] > 0,
                outside[i, j] == 0,
                outside[j, i] == 0,
                on_boundary[i, j] > 0,
                on_boundary[j, i] > 0,
            ))
    return out


# ---------------------------------------------------------------------------
# Box symmetry enumeration

_QUARTER = {
    "X": np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]]),
    "Y": np.array([[0, 0, 1], [0, 1, 0], [-1, 0, 0]]),
    "Z": np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]]),
}
_PLANE_NORMAL = {"XY": "Z", "XZ": "Y", "YZ": "X"}
_AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


def box_symmetries(extents, oriented: bool) -> tuple[set[str], set[str]]:
    """Rotational axes and reflection planes preserving a box of the given
    extents; oriented boxes must also keep their +Y face pointing up.

    An axis qualifies when some quarter-, half-, or three-quarter turn
    about it maps the box to itself.
    """
    extents = np.asarray(extents, float)
    up = np.array([0.0, 1.0, 0.0])
    axes = set()
    for name, q in _QUARTER.items():
        r = np.eye(3, dtype=int)
        for _ in range(3):  # 90, 180, 270 degrees
            r = q @ r
            new_extents = np.abs(r) @ extents
            if not np.allclose(new_extents, extents):
                continue
            if oriented and not np.allclose(r @ up, up):
                continue
            axes.add(name)
            break
    planes = set()
    for plane, normal in _PLANE_NORMAL.items():
        # reflecting a centered box across a coordinate plane fixes its
        # extents; an oriented box additionally may not flip its up normal
        if oriented and _AXIS_INDEX[normal] == 1:
            continue
        planes.add(plane)
    return axes, planes
