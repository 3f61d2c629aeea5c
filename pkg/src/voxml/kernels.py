"""Batch geometry kernels.

Classifying region-connection relations over large batches of box pairs is
the one numeric inner loop that dominates runtime (oracle sweeps run ~5e4
pairs, property checks thousands more).  Two interchangeable
implementations are provided:

* a pure-numpy vectorized path, and
* a numba ``@njit`` loop compiled on first use.

The active backend is chosen by the ``VOXML_KERNELS`` environment variable
(``numba`` or ``numpy``; default ``numba``, silently falling back to numpy
when numba is unavailable).  ``benchmarks/bench_rcc8.py`` compares the two.

Codes returned by the kernels index :data:`RCC8_CODE_ORDER`.
"""

from __future__ import annotations

import os

import numpy as np

from .model import Rcc8

ENV_VAR = "VOXML_KERNELS"

RCC8_CODE_ORDER = (
    Rcc8.DC, Rcc8.EC, Rcc8.PO, Rcc8.TPP, Rcc8.NTPP, Rcc8.TPPI, Rcc8.NTPPI, Rcc8.EQ,
)
_DC, _EC, _PO, _TPP, _NTPP, _TPPI, _NTPPI, _EQ = range(8)


def rcc8_codes_numpy(alo: np.ndarray, ahi: np.ndarray,
                     blo: np.ndarray, bhi: np.ndarray, eps: float) -> np.ndarray:
    """Vectorized classification of N box pairs; arrays are (N, 3) float64."""
    alo = np.asarray(alo, dtype=np.float64)
    ahi = np.asarray(ahi, dtype=np.float64)
    blo = np.asarray(blo, dtype=np.float64)
    bhi = np.asarray(bhi, dtype=np.float64)

    overlap = np.minimum(ahi, bhi) - np.maximum(alo, blo)
    disjoint = (overlap < -eps).any(axis=1)
    touching = (overlap <= eps).any(axis=1)

    eq = (np.abs(alo - blo) <= eps).all(axis=1) & (np.abs(ahi - bhi) <= eps).all(axis=1)
    a_in_b = ((alo >= blo - eps) & (ahi <= bhi + eps)).all(axis=1)
    b_in_a = ((blo >= alo - eps) & (bhi <= ahi + eps)).all(axis=1)
    a_strict = ((alo > blo + eps) & (ahi < bhi - eps)).all(axis=1)
    b_strict = ((blo > alo + eps) & (bhi < ahi - eps)).all(axis=1)

    return np.select(
        [disjoint, touching, eq,
         a_in_b & a_strict, a_in_b,
         b_in_a & b_strict, b_in_a],
        [_DC, _EC, _EQ, _NTPP, _TPP, _NTPPI, _TPPI],
        default=_PO,
    ).astype(np.uint8)


def _rcc8_codes_scalar_loop(alo, ahi, blo, bhi, eps, out):
    # Shared body for the numba path; identical decision order to the
    # numpy path so the two backends agree bit-for-bit on the codes.
    n = alo.shape[0]
    for i in range(n):
        disjoint = False
        touching = False
        eq = True
        a_in_b = True
        b_in_a = True
        a_strict = True
        b_strict = True
        for k in range(3):
            lo_a, hi_a = alo[i, k], ahi[i, k]
            lo_b, hi_b = blo[i, k], bhi[i, k]
            ov = min(hi_a, hi_b) - max(lo_a, lo_b)
            if ov < -eps:
                disjoint = True
            if ov <= eps:
                touching = True
            if abs(lo_a - lo_b) > eps or abs(hi_a - hi_b) > eps:
                eq = False
            if lo_a < lo_b - eps or hi_a > hi_b + eps:
                a_in_b = False
            if lo_b < lo_a - eps or hi_b > hi_a + eps:
                b_in_a = False
            if not (lo_a > lo_b + eps and hi_a < hi_b - eps):
                a_strict = False
            if not (lo_b > lo_a + eps and hi_b < hi_a - eps):
                b_strict = False
        if disjoint:
            out[i] = _DC
        elif touching:
            out[i] = _EC
        elif eq:
            out[i] = _EQ
        elif a_in_b:
            out[i] = _NTPP if a_strict else _TPP
        elif b_in_a:
            out[i] = _NTPPI if b_strict else _TPPI
        else:
            out[i] = _PO
    return out


_numba_impl = None


def _get_numba_impl():
    global _numba_impl
    if _numba_impl is None:
        from numba import njit

        _numba_impl = njit(cache=True)(_rcc8_codes_scalar_loop)
    return _numba_impl


def rcc8_codes_numba(alo, ahi, blo, bhi, eps: float) -> np.ndarray:
    alo = np.ascontiguousarray(alo, dtype=np.float64)
    ahi = np.ascontiguousarray(ahi, dtype=np.float64)
    blo = np.ascontiguousarray(blo, dtype=np.float64)
    bhi = np.ascontiguousarray(bhi, dtype=np.float64)
    out = np.empty(alo.shape[0], dtype=np.uint8)
    return _get_numba_impl()(alo, ahi, blo, bhi, eps, out)


_BACKENDS = {"numpy": rcc8_codes_numpy, "numba": rcc8_codes_numba}
_active: str | None = None


def select_backend(name: str | None = None) -> str:
    """Pick the kernel backend.  With ``None``, consult the environment."""
    global _active
    if name is None:
        name = os.environ.get(ENV_VAR, "numba").strip().lower()
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; expected one of {sorted(_BACKENDS)}")
    if name == "numba":
        try:
            import numba  # noqa: F401
        except ImportError:
            name = "numpy"
    _active = name
    return _active


def active_backend() -> str:
    if _active is None:
        select_backend()
    return _active  # type: ignore[return-value]


def rcc8_codes(alo, ahi, blo, bhi, eps: float) -> np.ndarray:
    """Classify N box pairs with the active backend; returns (N,) uint8."""
    return _BACKENDS[active_backend()](alo, ahi, blo, bhi, eps)
