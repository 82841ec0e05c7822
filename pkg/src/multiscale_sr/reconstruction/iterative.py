"""LSQR reconstruction on top of the fast box-sum operators."""

from __future__ import annotations

import logging
import math
import time

import numpy as np
from scipy.sparse.linalg import LinearOperator, lsqr

from ..signals import GridSignal, MeasurementSet, apply_T, apply_T_adjoint
from .config import Method, ReconstructionConfig, ReconstructionResult

log = logging.getLogger(__name__)


def stacked_operator(ms: MeasurementSet) -> LinearOperator:
    """The stacked map ``T`` of ``ms`` as a matrix-free operator."""
    shape = ms.source_shape
    n_in = int(np.prod(shape))
    sizes = [z.size for z in ms.data]
    splits = np.cumsum(sizes)[:-1]
    n_out = int(sum(sizes))

    def matvec(x):
        y = apply_T(np.reshape(x, shape), ms.scales, ms.mode, ms.normalization)
        return y.flat()

    def rmatvec(y):
        parts = np.split(np.ravel(y), splits)
        data = [p.reshape(z.shape) for p, z in zip(parts, ms.data)]
        return apply_T_adjoint(ms.with_data(data)).values.ravel()

    return LinearOperator((n_out, n_in), matvec=matvec, rmatvec=rmatvec, dtype=float)


def lsqr_reconstruct(ms: MeasurementSet, cfg: ReconstructionConfig | None = None) -> ReconstructionResult:
    """Minimise ``sum_j ||x * b_kj - z_j||^2 + lam ||x||^2`` with LSQR.

    Tikhonov regularization enters through LSQR's damping term
    (``damp = sqrt(lam)``). Iteration stops when the relative normal-equation
    residual falls below ``cfg.tol`` or after ``cfg.max_iter`` steps; a result
    that hit the iteration limit is returned with ``converged=False``.
    """
    cfg = cfg or ReconstructionConfig(method=Method.LSQR)
    op = stacked_operator(ms)
    max_iter = cfg.max_iter or 10 * op.shape[1]
    b = ms.flat()
    t0 = time.perf_counter()
    x, istop, itn, r1norm, r2norm, anorm, acond, arnorm, xnorm = lsqr(
        op, b, damp=math.sqrt(cfg.lam), atol=cfg.tol, btol=cfg.tol, conlim=0, iter_lim=max_iter)[:9]
    wall = (time.perf_counter() - t0) * 1e3
    converged = istop != 7
    if not converged:
        log.warning("LSQR stopped at the iteration limit (%d) before reaching tol=%g", itn, cfg.tol)
    bnorm = float(np.linalg.norm(b))
    rel = r2norm / bnorm if bnorm else r2norm
    normal = arnorm / (anorm * r2norm) if anorm and r2norm else 0.0
    return ReconstructionResult(
        GridSignal(x.reshape(ms.source_shape)), Method.LSQR, int(itn), float(rel), converged, wall,
        {"istop": int(istop), "normal_residual": float(normal), "cond_estimate": float(acond)})
