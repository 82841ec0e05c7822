"""Grid signals, box kernels and the multiscale forward model.

Conventions
-----------
Indexing is zero based and a box measurement ``y_k(a)`` is the sum over the
window ``[a, a + k)`` along every axis. The three convolution modes differ only
in which windows are kept:

* ``VALID``  -- windows fully inside the signal, ``n - k + 1`` samples per axis.
* ``FULL``   -- every window that overlaps the signal, ``n + k - 1`` samples;
  sample ``a`` covers ``[a - k + 1, a + 1)`` clipped to the signal.
* ``CYCLIC`` -- windows wrap around modulo ``n``, ``n`` samples per axis.

All box sums are evaluated with prefix sums (summed-area tables applied one
axis at a time), so applying the stacked operator costs ``O(N * S)`` for ``N``
pixels and ``S`` scales regardless of the box sizes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ConvMode(str, enum.Enum):
    VALID = "valid"
    FULL = "full"
    CYCLIC = "cyclic"


class Normalization(str, enum.Enum):
    UNIT = "unit"  # window sums
    MEAN = "mean"  # window averages


class ShapeError(ValueError):
    """Raised when signal shapes are inconsistent with the requested scales."""


@dataclass(frozen=True)
class GridSignal:
    """Real-valued signal on a 1-D or 2-D integer grid.

    ``origin`` gives the source-grid coordinate of ``values[0, ...]``; it is
    non-zero only for partial reconstructions (e.g. interior-only results).
    """

    values: np.ndarray
    origin: tuple[int, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (1, 2):
            raise ShapeError(f"signals must be 1-D or 2-D, got {values.ndim}-D")
        if values.size == 0 or min(values.shape) < 1:
            raise ShapeError("signal axes must have positive length")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        object.__setattr__(self, "values", values)
        origin = tuple(self.origin) if self.origin else (0,) * values.ndim
        if len(origin) != values.ndim:
            raise ShapeError("origin must have one entry per axis")
        object.__setattr__(self, "origin", origin)

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class BoxKernel:
    size: int
    dims: int = 1
    normalization: Normalization = Normalization.UNIT

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValueError(f"box size must be a positive integer, got {self.size}")
        if self.dims not in (1, 2):
            raise ValueError("box kernels are 1-D or 2-D")
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    @property
    def weight(self) -> float:
        if self.normalization is Normalization.UNIT:
            return 1.0
        return 1.0 / self.size**self.dims

    def array(self) -> np.ndarray:
        """Dense kernel weights (outer product of identical 1-D boxes)."""
        return np.full((self.size,) * self.dims, self.weight)


def output_length(n: int, k: int, mode: ConvMode) -> int:
    mode = ConvMode(mode)
    if mode is ConvMode.VALID:
        return n - k + 1
    if mode is ConvMode.FULL:
        return n + k - 1
    return n


def source_length(m: int, k: int, mode: ConvMode) -> int:
    """Inverse of :func:`output_length`: signal length from measurement length."""
    mode = ConvMode(mode)
    if mode is ConvMode.VALID:
        return m + k - 1
    if mode is ConvMode.FULL:
        return m - k + 1
    return m


def _as_array(signal) -> np.ndarray:
    if isinstance(signal, GridSignal):
        return signal.values
    return GridSignal(signal).values


def _check_size(k: int, shape: Sequence[int], mode: ConvMode) -> None:
    if int(k) != k or k < 1:
        raise ValueError(f"box size must be a positive integer, got {k}")
    if mode is ConvMode.VALID and min(shape) < k:
        raise ShapeError(f"VALID convolution needs every axis >= {k}, got shape {tuple(shape)}")


def _box_sum_axis(x: np.ndarray, k: int, mode: ConvMode, axis: int) -> np.ndarray:
    """Window sums of length ``k`` along one axis from a prefix-sum table."""
    x = np.moveaxis(x, axis, 0)
    n = x.shape[0]
    csum = np.zeros((n + 1,) + x.shape[1:])
    np.cumsum(x, axis=0, out=csum[1:])
    if mode is ConvMode.VALID:
        out = csum[k:] - csum[: n - k + 1]
    elif mode is ConvMode.FULL:
        a = np.arange(n + k - 1)
        out = csum[np.minimum(a + 1, n)] - csum[np.maximum(a - k + 1, 0)]
    else:
        # periodic prefix sum: S(x) = (x // n) * total + csum[x % n]
        total = csum[n]
        hi = np.arange(n) + k
        out = csum[hi % n] - csum[:n]
        out = out + (hi // n).reshape((n,) + (1,) * (x.ndim - 1)) * total
    return np.moveaxis(out, 0, axis)


def box_sums(x: np.ndarray, k: int, mode: ConvMode) -> np.ndarray:
    """UNIT box measurement of a raw array (all axes)."""
    mode = ConvMode(mode)
    _check_size(k, x.shape, mode)
    out = np.asarray(x, dtype=float)
    if k == 1:
        return out.copy()
    for axis in range(out.ndim):
        out = _box_sum_axis(out, k, mode, axis)
    return out


def box_convolve(signal, kernel: BoxKernel | int, mode: ConvMode = ConvMode.VALID) -> GridSignal:
    """Convolve ``signal`` with a box filter.

    >>> box_convolve(np.array([1., 2., 3., 4.]), 2, "valid").values
    array([3., 5., 7.])
    """
    x = _as_array(signal)
    if not isinstance(kernel, BoxKernel):
        kernel = BoxKernel(int(kernel), x.ndim)
    if kernel.dims != x.ndim:
        raise ShapeError(f"{kernel.dims}-D kernel applied to {x.ndim}-D signal")
    y = box_sums(x, kernel.size, ConvMode(mode))
    if kernel.normalization is Normalization.MEAN:
        y = y / kernel.size**x.ndim
    return GridSignal(y)


def interlace_measure(highres, k: int, mode: ConvMode = ConvMode.VALID) -> GridSignal:
    """Simulate ``k**d`` shifted binned captures and interleave them.

    Each capture bins the signal into non-overlapping ``k``-blocks starting at
    one sub-pixel origin (hardware binning); interleaving the captures gives the
    dense UNIT box convolution.
    """
    x = _as_array(highres)
    mode = ConvMode(mode)
    _check_size(k, x.shape, mode)
    if k == 1:
        return GridSignal(x.copy())
    d = x.ndim
    if mode is ConvMode.FULL:
        x = np.pad(x, k - 1)
    elif mode is ConvMode.CYCLIC:
        # enough wrapped samples for every window starting in [0, n)
        x = _wrap_extend(x, k)
    src_shape = x.shape
    out_shape = tuple(m - k + 1 for m in src_shape)
    out = np.empty(out_shape)
    for shift in np.ndindex(*(k,) * d):
        counts = [(m - o) // k for m, o in zip(src_shape, shift)]
        if min(counts) <= 0:
            continue
        block = x[tuple(slice(o, o + c * k) for o, c in zip(shift, counts))]
        # reshape (c1*k, c2*k) -> (c1, k, c2, k) and sum the k-axes
        split = []
        for c in counts:
            split += [c, k]
        binned = block.reshape(split).sum(axis=tuple(range(1, 2 * d, 2)))
        out[tuple(slice(o, None, k) for o in shift)] = binned
    return GridSignal(out)


def _wrap_extend(x: np.ndarray, k: int) -> np.ndarray:
    for axis, n in enumerate(x.shape):
        idx = np.arange(n + k - 1) % n
        x = np.take(x, idx, axis=axis)
    return x


def aggregate_scale(y, k: int, m: int, mode: ConvMode = ConvMode.VALID,
                    normalization: Normalization = Normalization.UNIT) -> GridSignal:
    """Turn a scale-``k`` measurement into the scale-``m*k`` measurement.

    ``y_{mk}(a) = sum_{i<m} y_k(a + i*k)`` along each axis (for FULL the
    sample ``a`` refers to window end points, so the offsets are ``-i*k``).
    """
    yk = _as_array(y)
    mode = ConvMode(mode)
    normalization = Normalization(normalization)
    if int(m) != m or m < 1:
        raise ValueError(f"aggregation factor must be a positive integer, got {m}")
    if m == 1:
        return GridSignal(yk.copy())
    out = yk
    for axis in range(yk.ndim):
        out = _aggregate_axis(out, k, m, mode, axis)
    if normalization is Normalization.MEAN:
        out = out / m**yk.ndim
    return GridSignal(out)


def _aggregate_axis(y: np.ndarray, k: int, m: int, mode: ConvMode, axis: int) -> np.ndarray:
    y = np.moveaxis(y, axis, 0)
    length = y.shape[0]
    n = source_length(length, k, mode)
    K = m * k
    if mode is ConvMode.VALID:
        out_len = n - K + 1
        if out_len < 1:
            raise ShapeError(f"scale {K} exceeds signal length {n}")
        out = sum(y[i * k: i * k + out_len] for i in range(m))
    elif mode is ConvMode.FULL:
        out_len = n + K - 1
        pad = np.zeros(((m - 1) * k,) + y.shape[1:])
        padded = np.concatenate([pad, y, pad])
        out = sum(padded[(m - 1 - i) * k: (m - 1 - i) * k + out_len] for i in range(m))
    else:
        idx = np.arange(n)
        out = sum(y[(idx + i * k) % n] for i in range(m))
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class IntegralImage:
    """Summed-area table with a leading guard row/column of zeros."""

    cumulative: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.cumulative.shape)

    def box_sum(self, start: Sequence[int], stop: Sequence[int]) -> float:
        """Sum of the source over the half-open box ``[start, stop)``."""
        start, stop = tuple(start), tuple(stop)
        if len(start) != self.cumulative.ndim or len(stop) != len(start):
            raise ShapeError("box corners must have one entry per axis")
        c = self.cumulative
        if c.ndim == 1:
            return float(c[stop[0]] - c[start[0]])
        (r0, c0), (r1, c1) = start, stop
        return float(c[r1, c1] - c[r0, c1] - c[r1, c0] + c[r0, c0])

    def window_sums(self, k: int) -> np.ndarray:
        """All VALID ``k``-window sums, using ``2**d`` table lookups each."""
        c = self.cumulative
        if c.ndim == 1:
            return c[k:] - c[:-k]
        return c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]


def integral_image(signal) -> IntegralImage:
    x = _as_array(signal)
    table = np.zeros(tuple(s + 1 for s in x.shape))
    table[(slice(1, None),) * x.ndim] = x
    for axis in range(x.ndim):
        np.cumsum(table, axis=axis, out=table)
    return IntegralImage(table)


@dataclass(frozen=True)
class MeasurementSet:
    """Box measurements of one high-resolution signal at several scales."""

    scales: tuple[int, ...]
    mode: ConvMode
    normalization: Normalization
    data: tuple[GridSignal, ...]
    source_shape: tuple[int, ...]
    sigma: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        scales = tuple(int(k) for k in self.scales)
        mode = ConvMode(self.mode)
        norm = Normalization(self.normalization)
        data = tuple(d if isinstance(d, GridSignal) else GridSignal(d) for d in self.data)
        source_shape = tuple(int(s) for s in self.source_shape)
        if not scales:
            raise ValueError("a measurement set needs at least one scale")
        if any(k < 1 for k in scales):
            raise ValueError(f"scales must be positive integers, got {scales}")
        if len(set(scales)) != len(scales):
            raise ValueError(f"scales must be distinct, got {scales}")
        if len(data) != len(scales):
            raise ShapeError("one data array is required per scale")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        order = np.argsort(scales, kind="stable")
        scales = tuple(scales[i] for i in order)
        data = tuple(data[i] for i in order)
        for k, z in zip(scales, data):
            expected = tuple(output_length(n, k, mode) for n in source_shape)
            if z.shape != expected:
                raise ShapeError(f"scale {k} data has shape {z.shape}, expected {expected} for {mode.value}")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "normalization", norm)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "source_shape", source_shape)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def dims(self) -> int:
        return len(self.source_shape)

    def with_data(self, data: Sequence[np.ndarray], sigma: float | None = None) -> "MeasurementSet":
        return MeasurementSet(self.scales, self.mode, self.normalization, tuple(data),
                              self.source_shape, self.sigma if sigma is None else sigma, dict(self.meta))

    def subset(self, scales: Sequence[int]) -> "MeasurementSet":
        keep = [self.scales.index(k) for k in scales]
        return MeasurementSet(tuple(self.scales[i] for i in keep), self.mode, self.normalization,
                              tuple(self.data[i] for i in keep), self.source_shape, self.sigma, dict(self.meta))

    def flat(self) -> np.ndarray:
        return np.concatenate([z.values.ravel() for z in self.data])


def apply_T(u, scales: Sequence[int], mode: ConvMode = ConvMode.VALID,
            norm: Normalization = Normalization.UNIT) -> MeasurementSet:
    """Stacked forward map ``u -> (u * b_k1, ..., u * b_ks)``."""
    x = _as_array(u)
    mode = ConvMode(mode)
    norm = Normalization(norm)
    data = []
    for k in scales:
        y = box_sums(x, int(k), mode)
        if norm is Normalization.MEAN:
            y /= k**x.ndim
        data.append(y)
    return MeasurementSet(tuple(scales), mode, norm, tuple(data), x.shape)


def _adjoint_single(v: np.ndarray, k: int, mode: ConvMode) -> np.ndarray:
    if k == 1:
        return v.copy()
    out = v
    for axis in range(v.ndim):
        if mode is ConvMode.VALID:
            out = _box_sum_axis(out, k, ConvMode.FULL, axis)
        elif mode is ConvMode.FULL:
            out = _box_sum_axis(out, k, ConvMode.VALID, axis)
        else:
            # windows ending at t instead of starting at t
            out = np.roll(_box_sum_axis(out, k, ConvMode.CYCLIC, axis), k - 1, axis=axis)
    return out


def apply_T_adjoint(ms: MeasurementSet) -> GridSignal:
    """Exact transpose of :func:`apply_T` for the set's mode and normalization."""
    d = ms.dims
    out = np.zeros(ms.source_shape)
    for k, z in zip(ms.scales, ms.data):
        expected = tuple(output_length(n, k, ms.mode) for n in ms.source_shape)
        if z.shape != expected:
            raise ShapeError(f"scale {k} data has shape {z.shape}, expected {expected}")
        back = _adjoint_single(z.values, k, ms.mode)
        if ms.normalization is Normalization.MEAN:
            back = back / k**d
        out += back
    return GridSignal(out)


def add_noise(ms: MeasurementSet, sigma: float, seed=None) -> MeasurementSet:
    """Add i.i.d. Gaussian noise of std ``sigma`` to every measured pixel.

    Scales draw from one generator in ascending scale order, so the result
    depends only on ``seed``.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return ms.with_data([z.values.copy() for z in ms.data], sigma=0.0)
    rng = np.random.default_rng(seed)
    noisy = [z.values + sigma * rng.standard_normal(z.shape) for z in ms.data]
    return ms.with_data(noisy, sigma=sigma)


def dense_operator(shape: Sequence[int], scales: Sequence[int], mode: ConvMode = ConvMode.VALID,
                   norm: Normalization = Normalization.UNIT) -> np.ndarray:
    """Explicit matrix of the stacked map, built row by row from window indices.

    Rows follow :meth:`MeasurementSet.flat` ordering (scales ascending, then
    row-major pixels). Intended for small problems and as a test oracle.
    """
    mode = ConvMode(mode)
    norm = Normalization(norm)
    shape = tuple(int(n) for n in shape)
    blocks = []
    for k in sorted(scales):
        mats = [_window_matrix(n, k, mode) for n in shape]
        block = mats[0]
        for extra in mats[1:]:
            block = np.kron(block, extra)
        if norm is Normalization.MEAN:
            block = block / k**len(shape)
        blocks.append(block)
    return np.vstack(blocks)


def _window_matrix(n: int, k: int, mode: ConvMode) -> np.ndarray:
    _check_size(k, (n,), mode)
    rows = output_length(n, k, mode)
    mat = np.zeros((rows, n))
    for a in range(rows):
        if mode is ConvMode.VALID:
            cols = range(a, a + k)
        elif mode is ConvMode.FULL:
            cols = range(max(a - k + 1, 0), min(a + 1, n))
        else:
            cols = [(a + i) % n for i in range(k)]
        for c in cols:
            mat[a, c] += 1.0
    return mat
