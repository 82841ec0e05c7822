"""Closed-form regularized least squares for cyclic measurements.

Every cyclic box measurement is diagonal in the DFT basis, so the normal
equations decouple into one scalar problem per frequency::

    U(w) = sum_j conj(H_j(w)) Z_j(w) / (lam + sum_j |H_j(w)|^2)

where ``H_j`` are the transfer functions of the measurements.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..signals import ConvMode, GridSignal, MeasurementSet, Normalization, ShapeError
from ..spectral import NonInvertibleError, transfer_function
from .config import PadPolicy


def transfers(scales: Sequence[int], shape: Sequence[int], norm: Normalization) -> list[np.ndarray]:
    return [transfer_function(k, shape, norm) for k in scales]


def _check_denominator(den: np.ndarray, lam: float, scales) -> None:
    if lam == 0:
        # transfer magnitudes are exact zeros on blind grid frequencies
        bad = np.argwhere(den <= 1e-300)
        if bad.size:
            idx = tuple(int(i) for i in bad[0])
            raise NonInvertibleError(
                f"scales {tuple(scales)} are jointly blind at frequency index {idx} "
                f"({bad.shape[0]} such frequencies); use lam > 0 or coprime scales", idx)


def fourier_solve(data: Sequence[np.ndarray], scales: Sequence[int], shape: Sequence[int],
                  norm: Normalization, lam: float = 0.0) -> np.ndarray:
    """Solve on raw cyclic arrays; leading axes of ``data`` arrays are batch axes."""
    d = len(shape)
    axes = tuple(range(-d, 0))
    H = transfers(scales, shape, norm)
    den = lam + sum(np.abs(h) ** 2 for h in H)
    _check_denominator(den, lam, scales)
    num = sum(np.conj(h) * np.fft.fftn(z, axes=axes) for h, z in zip(H, data))
    return np.fft.ifftn(num / den, axes=axes).real


def cyclic_data(ms: MeasurementSet, pad_policy: PadPolicy = PadPolicy.REJECT) -> list[np.ndarray]:
    """Cyclic measurement arrays for ``ms``.

    FULL data folds exactly onto cyclic data (each wrapped window is the sum
    of its two clipped pieces). VALID data lacks the wrapped windows, which
    are filled according to ``pad_policy``.
    """
    if ms.mode is ConvMode.CYCLIC:
        return [z.values for z in ms.data]
    if ms.mode is ConvMode.FULL:
        return [_fold_full(z.values, k, ms.source_shape) for k, z in zip(ms.scales, ms.data)]
    pad_policy = PadPolicy(pad_policy)
    if pad_policy is PadPolicy.REJECT:
        raise ShapeError("Fourier reconstruction needs cyclic data; pass a pad policy for VALID measurements")
    mode = "constant" if pad_policy is PadPolicy.ZERO_PAD else "symmetric"
    out = []
    for k, z in zip(ms.scales, ms.data):
        widths = [(0, n - m) for n, m in zip(ms.source_shape, z.shape)]
        out.append(np.pad(z.values, widths, mode=mode))
    return out


def _fold_full(z: np.ndarray, k: int, shape: Sequence[int]) -> np.ndarray:
    for axis, n in enumerate(shape):
        if k > n:
            raise ShapeError(f"cannot fold FULL data with box {k} > signal length {n}")
        z = np.moveaxis(z, axis, 0)
        folded = z[k - 1: k - 1 + n].copy()
        # windows starting at a >= n - k + 1 wrap: add the piece from the front
        folded[n - k + 1:] += z[: k - 1]
        z = np.moveaxis(folded, 0, axis)
    return z


def fourier_reconstruct(ms: MeasurementSet, lam: float = 0.0,
                        pad_policy: PadPolicy = PadPolicy.REJECT) -> GridSignal:
    """Regularized least-squares estimate from cyclic measurements."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    data = cyclic_data(ms, pad_policy)
    u = fourier_solve(data, ms.scales, ms.source_shape, ms.normalization, lam)
    return GridSignal(u)


def per_scale_filters(scales: Sequence[int], n: int | Sequence[int], lam: float = 0.0,
                      norm: Normalization = Normalization.UNIT) -> list[GridSignal]:
    """Spatial filters ``h_j`` with ``u_hat = sum_j z_j (*) h_j`` (circular convolution)."""
    shape = (n,) if np.isscalar(n) else tuple(n)
    H = transfers(scales, shape, norm)
    den = lam + sum(np.abs(h) ** 2 for h in H)
    _check_denominator(den, lam, scales)
    return [GridSignal(np.fft.ifftn(np.conj(h) / den).real) for h in H]


def circular_convolve(z, h) -> np.ndarray:
    """Circular convolution ``(z (*) h)(a) = sum_t z(t) h(a - t)`` via the FFT."""
    z = z.values if isinstance(z, GridSignal) else np.asarray(z, dtype=float)
    h = h.values if isinstance(h, GridSignal) else np.asarray(h, dtype=float)
    return np.fft.ifftn(np.fft.fftn(z) * np.fft.fftn(h)).real


def apply_filters(ms: MeasurementSet, filters: Sequence[GridSignal]) -> GridSignal:
    return GridSignal(sum(circular_convolve(z, h) for z, h in zip(cyclic_data(ms), filters)))
