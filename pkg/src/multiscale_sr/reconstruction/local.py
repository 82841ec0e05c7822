"""Exact pixel-wise reconstruction from box sums at coprime scales.

In 1-D two adjacent box sizes ``k`` and ``k + 1`` recover a sample by a
single difference, ``u(a) = y_{k+1}(a) - y_k(a + 1)``. In 2-D boxes of sizes
``k``, ``k + 1`` and ``2k + 1`` tile around a pixel so that::

    u(a, b) = y_k(a+1, b-k) + y_k(a-k, b+1) + y_{k+1}(a, b)
              + y_{k+1}(a-k, b-k) - y_{2k+1}(a-k, b-k)

Arbitrary coprime sizes are reduced to these cases by aggregating each
measurement to a multiple of its scale (Bezout / CRT plans).
"""

from __future__ import annotations

import numpy as np

from ..signals import (ConvMode, GridSignal, MeasurementSet, Normalization, ShapeError,
                       aggregate_scale, box_convolve)
from .plans import BezoutPlan, CrtPlan, PlanError, bezout_plan, crt_plan


def _unit(values: np.ndarray, k: int, d: int, norm: Normalization) -> np.ndarray:
    return values * k**d if Normalization(norm) is Normalization.MEAN else values


def local_reconstruct_1d(y1, y2, plan: BezoutPlan, mode: ConvMode = ConvMode.CYCLIC,
                         normalization: Normalization = Normalization.UNIT) -> GridSignal:
    """Recover a 1-D signal from measurements at scales ``plan.k1`` and ``plan.k2``.

    CYCLIC data gives every sample. For VALID data the forward difference
    covers ``a < n - k`` and the backward form ``y_{k+1}(a-k) - y_k(a-k)``
    covers ``a >= k``; together they need ``n >= 2k``.
    """
    mode = ConvMode(mode)
    z1 = _unit(y1.values if isinstance(y1, GridSignal) else np.asarray(y1, float), plan.k1, 1, normalization)
    z2 = _unit(y2.values if isinstance(y2, GridSignal) else np.asarray(y2, float), plan.k2, 1, normalization)
    if z1.ndim != 1 or z2.ndim != 1:
        raise ShapeError("1-D local reconstruction takes 1-D measurements")
    if mode is ConvMode.FULL:
        raise ShapeError("local reconstruction supports CYCLIC or VALID data")
    k = plan.k
    if mode is ConvMode.CYCLIC:
        if z1.shape != z2.shape:
            raise PlanError("cyclic measurements must have equal length")
        n = z1.size
    else:
        n = z1.size + plan.k1 - 1
        if z2.size + plan.k2 - 1 != n:
            raise PlanError("measurement lengths do not match the plan's scales")
        if n < 2 * k:
            raise ShapeError(f"VALID local reconstruction needs n >= {2 * k}, got {n}")
    yk = aggregate_scale(z1, plan.k1, plan.m1, mode).values
    yk1 = aggregate_scale(z2, plan.k2, plan.m2, mode).values
    if mode is ConvMode.CYCLIC:
        return GridSignal(yk1 - np.roll(yk, -1))
    u = np.empty(n)
    head = n - k
    u[:head] = yk1[:head] - yk[1:head + 1]
    u[head:] = yk1[head - k:n - k] - yk[head - k:n - k]
    return GridSignal(u)


def local_reconstruct_pair(ms: MeasurementSet) -> GridSignal:
    """1-D local reconstruction from the two scales of a measurement set."""
    if ms.dims != 1 or len(ms.scales) != 2:
        raise PlanError("1-D local reconstruction needs exactly two scales")
    plan = bezout_plan(*ms.scales)
    return local_reconstruct_1d(ms.data[0], ms.data[1], plan, ms.mode, ms.normalization)


def local_reconstruct_2d(ms: MeasurementSet, plan: CrtPlan | None = None) -> GridSignal:
    """Recover a 2-D signal from three pairwise coprime scales.

    CYCLIC data is indexed modulo ``n`` so every pixel is recovered. VALID data
    yields the interior ``[k, n - k)`` on each axis; the returned signal's
    ``origin`` records that margin.
    """
    if ms.dims != 2 or len(ms.scales) != 3:
        raise PlanError("2-D local reconstruction needs exactly three scales")
    if plan is None:
        plan = crt_plan(*ms.scales)
    if sorted(plan.scales) != sorted(ms.scales):
        raise PlanError(f"plan scales {plan.scales} do not match measurements {ms.scales}")
    if ms.mode is ConvMode.FULL:
        raise ShapeError("local reconstruction supports CYCLIC or VALID data")
    k = plan.k
    n0, n1 = ms.source_shape
    if min(n0, n1) < 2 * k + 1:
        raise ShapeError(f"2-D local reconstruction needs n >= 2k+1 = {2 * k + 1}")
    agg = {}
    for kj, mj in zip(plan.scales, plan.multipliers):
        z = ms.data[ms.scales.index(kj)].values
        agg[kj * mj] = aggregate_scale(_unit(z, kj, 2, ms.normalization), kj, mj, ms.mode).values
    yk, yk1, y2k1 = agg[k], agg[k + 1], agg[2 * k + 1]

    if ms.mode is ConvMode.CYCLIC:
        def at(y, da, db):
            # y(a + da, b + db) for all (a, b), indices mod n
            return np.roll(y, (-da, -db), axis=(0, 1))

        u = (at(yk, 1, -k) + at(yk, -k, 1) + yk1 + at(yk1, -k, -k) - at(y2k1, -k, -k))
        return GridSignal(u)

    a = np.arange(k, n0 - k)[:, None]
    b = np.arange(k, n1 - k)[None, :]
    u = (yk[a + 1, b - k] + yk[a - k, b + 1] + yk1[a, b] + yk1[a - k, b - k] - y2k1[a - k, b - k])
    return GridSignal(u, origin=(k, k))


def local_reconstruct(ms: MeasurementSet) -> GridSignal:
    if ms.dims == 1:
        return local_reconstruct_pair(ms)
    return local_reconstruct_2d(ms)


def nullspace_witness(k1: int, k2: int, n: int) -> GridSignal:
    """A nonzero ``n x n`` signal with zero VALID box sums at sizes ``k1`` and ``k2``.

    Built as the outer product of a ``k1``-periodic and a ``k2``-periodic
    zero-mean sequence; e.g. ``(1,-1,1,-1)`` and ``(1,-1,0,1)`` for sizes 2, 3.
    """
    if min(k1, k2) < 2:
        raise ValueError("box sizes must be at least 2 to have a nullspace")
    if n < max(k1, k2):
        raise ShapeError(f"n={n} is too small for boxes of size {k1} and {k2}")
    x1 = _periodic_zero_mean(k1, n)
    x2 = _periodic_zero_mean(k2, n)
    w = np.outer(x1, x2)
    for k in (k1, k2):
        if np.any(box_convolve(w, k, ConvMode.VALID).values != 0):
            raise AssertionError(f"witness not annihilated by box {k}")  # pragma: no cover
    return GridSignal(w)


def _periodic_zero_mean(k: int, n: int) -> np.ndarray:
    base = np.zeros(k)
    base[0], base[1] = 1.0, -1.0
    return base[np.arange(n) % k]
