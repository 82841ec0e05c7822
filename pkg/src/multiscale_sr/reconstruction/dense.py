"""Explicit-matrix least squares, used to verify the fast solvers."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ..signals import GridSignal, MeasurementSet, dense_operator

MAX_PIXELS = 4096


class SizeGuardError(ValueError):
    pass


def _matrix(ms: MeasurementSet) -> np.ndarray:
    n_pix = int(np.prod(ms.source_shape))
    if n_pix > MAX_PIXELS:
        raise SizeGuardError(f"dense oracle limited to {MAX_PIXELS} pixels, got {n_pix}")
    return dense_operator(ms.source_shape, ms.scales, ms.mode, ms.normalization)


def dense_oracle(ms: MeasurementSet, lam: float = 0.0) -> GridSignal:
    """Minimum-norm least squares (``lam = 0``) or ridge solution by explicit matrices."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    T = _matrix(ms)
    z = ms.flat()
    if lam == 0:
        # complete orthogonal factorisation gives the minimum-norm solution
        cond = max(T.shape) * np.finfo(float).eps
        x = scipy.linalg.lstsq(T, z, cond=cond, lapack_driver="gelsy")[0]
    else:
        gram = T.T @ T + lam * np.eye(T.shape[1])
        x = scipy.linalg.solve(gram, T.T @ z, assume_a="pos")
    return GridSignal(x.reshape(ms.source_shape))


def operator_rank(shape, scales, mode, norm="unit") -> int:
    T = dense_operator(shape, scales, mode, norm)
    if T.shape[1] > MAX_PIXELS:
        raise SizeGuardError(f"dense rank limited to {MAX_PIXELS} pixels")
    return int(np.linalg.matrix_rank(T))


def nullspace_basis(shape, scales, mode, norm="unit") -> np.ndarray:
    """Orthonormal columns spanning the kernel of the stacked map."""
    T = dense_operator(shape, scales, mode, norm)
    return scipy.linalg.null_space(T)
