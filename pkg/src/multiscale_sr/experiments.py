"""Simulated experiments: noise-law checks, coprime scans, scale-count comparisons.

Randomness
----------
Every trial ``i`` of an experiment with seed ``s`` draws from
``numpy.random.default_rng(SeedSequence(s, spawn_key=(i,)))`` (PCG64), the
same stream ``SeedSequence(s).spawn(...)[i]`` would give. Noise for the
scales of one trial is drawn in ascending scale order. A trial's result
therefore depends only on ``(seed, i)``, not on execution order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .reconstruction import Method, ReconstructionConfig, fourier_solve, reconstruct
from .signals import (ConvMode, GridSignal, MeasurementSet, Normalization, add_noise, apply_T,
                      dense_operator)
from .spectral import (NonInvertibleError, asymptotic_trace, pairwise_coprime, predicted_mse,
                       stacked_profile, valid_mode_trace)

BAND_FORMULA = (
    "||e||^2 = sum_i l_i chi2_1 with l_i the eigenvalues of sigma^2 (T'T)^-1, so the trial mean of "
    "||e||^2/(n^d sigma^2) has relative std r = sqrt(2 sum l_i^2 / trials) / sum l_i; "
    "the RMSE ratio band is [sqrt(1 - z r), sqrt(1 + z r)]"
)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(trial,))


def error_eigenvalues(scales, shape, mode: ConvMode, norm: Normalization) -> np.ndarray:
    """Eigenvalues of ``(T'T)^-1`` (unit noise), spectrally or by dense SVD."""
    mode = ConvMode(mode)
    d = len(shape)
    if mode is ConvMode.CYCLIC and len(set(shape)) == 1:
        prof = stacked_profile(scales, shape[0], d, norm)
        if not prof.invertible:
            raise NonInvertibleError(f"scales {tuple(scales)} are not invertible on this grid", prof.argmin)
        return (1.0 / prof.sigma_values**2).ravel()
    T = dense_operator(shape, scales, mode, norm)
    s = np.linalg.svd(T, compute_uv=False)
    if s.size < T.shape[1] or s.min() <= s.max() * max(T.shape) * np.finfo(float).eps:
        raise NonInvertibleError(f"scales {tuple(scales)} give a rank-deficient {mode.value} operator")
    return 1.0 / s**2


def ratio_band(eigs: np.ndarray, trials: int, z: float = 3.0) -> tuple[float, float]:
    r = math.sqrt(2 * np.sum(eigs**2) / trials) / np.sum(eigs)
    return math.sqrt(max(0.0, 1 - z * r)), math.sqrt(1 + z * r)


@dataclass
class ExperimentReport:
    config: dict
    predicted_rmse_factor: float | None
    empirical_rmse_factor: float
    empirical_rmse_std: float
    ratio: float | None
    ratio_band: tuple[float, float] | None = None
    band_formula: str = BAND_FORMULA
    exact: bool = False
    scale_table: list[dict] = field(default_factory=list)
    wall_ms: float = 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ratio_band"] = list(self.ratio_band) if self.ratio_band else None
        return out


def _signal(target) -> np.ndarray:
    return target.values if isinstance(target, GridSignal) else np.asarray(target, dtype=float)


def _batched_fourier_errors(u, ms0: MeasurementSet, sigma, lam, seed, trials, chunk=64) -> np.ndarray:
    errs = np.empty(trials)
    clean = [z.values for z in ms0.data]
    for start in range(0, trials, chunk):
        idx = range(start, min(trials, start + chunk))
        noisy = [np.empty((len(idx),) + c.shape) for c in clean]
        for row, i in enumerate(idx):
            rng = trial_rng(seed, i)
            for j, c in enumerate(clean):
                noisy[j][row] = c + sigma * rng.standard_normal(c.shape)
        est = fourier_solve(noisy, ms0.scales, ms0.source_shape, ms0.normalization, lam)
        diff = (est - u).reshape(len(idx), -1)
        errs[start:start + len(idx)] = np.sum(diff**2, axis=1)
    return errs


def run_noise_experiment(target, scales: Sequence[int], mode: ConvMode = ConvMode.CYCLIC,
                         sigma: float = 1.0, trials: int = 256, method: Method = Method.FOURIER,
                         lam: float = 0.0, seed: int = 0,
                         normalization: Normalization = Normalization.MEAN,
                         workers: int = 1) -> ExperimentReport:
    """Compare the empirical reconstruction error with ``sigma^2 tr((T'T)^-1)``.

    The empirical factor is ``sqrt(mean_t ||u_hat - u||^2 / (n^d sigma^2))``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    t0 = time.perf_counter()
    u = _signal(target)
    mode, method, norm = ConvMode(mode), Method(method), Normalization(normalization)
    scales = tuple(sorted(int(k) for k in scales))
    ms0 = apply_T(u, scales, mode, norm)
    n_pix = u.size
    config = {"scales": list(scales), "shape": list(u.shape), "d": u.ndim, "mode": mode.value,
              "normalization": norm.value, "sigma": sigma, "lambda": lam, "method": method.value,
              "trials": trials, "seed": seed}

    predicted = band = None
    eigs = None
    if lam == 0:
        eigs = error_eigenvalues(scales, u.shape, mode, norm)
        predicted = math.sqrt(float(np.mean(eigs)))
        band = ratio_band(eigs, trials)

    if sigma == 0:
        cfg = ReconstructionConfig(method=method, lam=lam)
        err = float(np.sum((reconstruct(ms0, cfg).signal.values - u) ** 2))
        wall = (time.perf_counter() - t0) * 1e3
        return ExperimentReport(config, predicted, 0.0, 0.0, None, band, exact=err <= 1e-12 * max(1.0, n_pix),
                                wall_ms=wall)

    if method is Method.FOURIER and mode is ConvMode.CYCLIC:
        errs = _batched_fourier_errors(u, ms0, sigma, lam, seed, trials)
    else:
        cfg = ReconstructionConfig(method=method, lam=lam)

        def one(i):
            ms = add_noise(ms0, sigma, trial_seed(seed, i))
            return float(np.sum((reconstruct(ms, cfg).signal.values - u) ** 2))

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                errs = np.array(list(pool.map(one, range(trials))))
        else:
            errs = np.array([one(i) for i in range(trials)])

    per_trial = errs / (n_pix * sigma**2)
    empirical = math.sqrt(float(np.mean(per_trial)))
    spread = float(np.std(np.sqrt(per_trial)))
    ratio = empirical / predicted if predicted else None
    wall = (time.perf_counter() - t0) * 1e3
    return ExperimentReport(config, predicted, empirical, spread, ratio, band, wall_ms=wall)


@dataclass
class ScanResult:
    """Predicted RMSE factors over scale combinations (``inf`` = non-invertible)."""

    combos: list[tuple[int, ...]]
    factors: list[float]
    coprime: list[bool]
    n: int
    d: int
    mode: str

    def as_matrix(self, kmax: int) -> np.ndarray:
        """Pairs only: ``M[k1, k2]`` (symmetric, NaN where not computed)."""
        m = np.full((kmax + 1, kmax + 1), np.nan)
        for c, f in zip(self.combos, self.factors):
            if len(c) == 2:
                m[c[0], c[1]] = m[c[1], c[0]] = f
        return m

    def rows(self) -> list[dict]:
        return [{"scales": list(c), "rmse_factor": f, "coprime": cp}
                for c, f, cp in zip(self.combos, self.factors, self.coprime)]


def predicted_factor(scales, n: int, d: int, mode: ConvMode,
                     norm: Normalization = Normalization.MEAN) -> float:
    mode = ConvMode(mode)
    try:
        if mode is ConvMode.CYCLIC:
            return predicted_mse(stacked_profile(scales, n, d, norm), asymptotic=False).rmse_factor
        return math.sqrt(valid_mode_trace(scales, n, d, norm)) if mode is ConvMode.VALID else \
            math.sqrt(float(np.mean(error_eigenvalues(scales, (n,) * d, mode, norm))))
    except NonInvertibleError:
        return math.inf


def coprime_scan(kmax: int, n: int, d: int = 1, mode: ConvMode = ConvMode.CYCLIC, kmin: int = 2,
                 max_combos: int | None = None) -> ScanResult:
    """Predicted ``sqrt(tr((T'T)^-1) / n^d)`` for all pairs (d=1) or triples (d=2)."""
    size = d + 1
    combos, factors, flags = [], [], []
    for c in combinations(range(kmin, kmax + 1), size):
        if max_combos is not None and len(combos) >= max_combos:
            break
        combos.append(c)
        flags.append(pairwise_coprime(c))
        factors.append(predicted_factor(c, n, d, mode))
    return ScanResult(combos, factors, flags, n, d, ConvMode(mode).value)


def blind_mask(scales: Sequence[int], n: int, d: int = 2, radius: float = 1.0) -> np.ndarray:
    """Grid frequencies within ``radius`` bins of a common zero of the given scales.

    A point is a common zero when every scale has some coordinate on its zero
    set. For one scale that is a union of lines; for two coprime scales in 2-D
    it is the product set ``Z_k1 x Z_k2`` and its transpose.
    """
    j = np.arange(n)

    def near(k):
        # circular distance (in bins) to the nearest 2 pi m / k, 1 <= m < k
        zeros = n * np.arange(1, k) / k
        dist = np.abs(j[:, None] - zeros[None, :])
        dist = np.minimum(dist, n - dist)
        return (dist <= radius).any(axis=1) if k > 1 else np.zeros(n, dtype=bool)

    per_scale = [near(k) for k in scales]
    if d == 1:
        mask = np.ones(n, dtype=bool)
        for m in per_scale:
            mask &= m
        return mask
    mask = np.zeros((n, n), dtype=bool)
    # assign each scale to an axis; a common zero needs every scale covered
    for assign in np.ndindex(*(2,) * len(scales)):
        part = np.ones((n, n), dtype=bool)
        for m, axis in zip(per_scale, assign):
            part &= m[:, None] if axis == 0 else m[None, :]
        mask |= part
    return mask


@dataclass
class ScaleCountReport:
    config: dict
    subsets: list[tuple[int, ...]]
    rmse: list[float]
    blind_energy_fraction: list[float]
    ordered: bool
    residuals: list[np.ndarray] = field(default_factory=list, repr=False)
    reconstructions: list[np.ndarray] = field(default_factory=list, repr=False)
    wall_ms: float = 0.0

    def to_dict(self) -> dict:
        return {"config": self.config, "subsets": [list(s) for s in self.subsets], "rmse": self.rmse,
                "blind_energy_fraction": self.blind_energy_fraction, "ordered": self.ordered,
                "wall_ms": self.wall_ms}


def scale_count_comparison(target, scales3: Sequence[int] = (9, 10, 11), lam: float = 1e-6,
                           sigma: float = 1e-5, seed: int = 0, radius: float = 2.0,
                           normalization: Normalization = Normalization.MEAN) -> ScaleCountReport:
    """Reconstruct a 2-D target from one, two and three of the given scales."""
    t0 = time.perf_counter()
    u = _signal(target)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("scale-count comparison needs a square 2-D target")
    scales3 = tuple(int(k) for k in scales3)
    if len(scales3) != 3 or not pairwise_coprime(scales3):
        raise ValueError("three pairwise coprime scales are required")
    n = u.shape[0]
    ms = add_noise(apply_T(u, scales3, ConvMode.CYCLIC, normalization), sigma, seed)
    subsets = [scales3[:1], scales3[:2], scales3]
    rmse, fractions, residuals, recons = [], [], [], []
    for sub in subsets:
        est = fourier_solve([ms.data[ms.scales.index(k)].values for k in sub], sub, u.shape,
                            ms.normalization, lam)
        res = est - u
        rmse.append(float(np.sqrt(np.mean(res**2))))
        power = np.abs(np.fft.fft2(res)) ** 2
        fractions.append(float(power[blind_mask(sub, n, 2, radius)].sum() / power.sum()))
        residuals.append(res)
        recons.append(est)
    ordered = rmse[0] > rmse[1] > rmse[2]
    config = {"scales": list(scales3), "n": n, "lambda": lam, "sigma": sigma, "seed": seed,
              "radius": radius, "normalization": Normalization(normalization).value}
    return ScaleCountReport(config, subsets, rmse, fractions, ordered, residuals, recons,
                            (time.perf_counter() - t0) * 1e3)


def trace_convergence_sweep(scales: Sequence[int], d: int, n_list: Sequence[int],
                            valid_max_n: int = 400) -> list[dict]:
    """``sqrt(tr((T'T)^-1)/n^d)`` for cyclic and (small n) VALID operators plus the limit."""
    try:
        asym = math.sqrt(asymptotic_trace(scales, d))
    except NonInvertibleError:
        asym = math.inf
    rows = []
    for n in n_list:
        cyc = predicted_factor(scales, n, d, ConvMode.CYCLIC)
        val = None
        if n**d <= valid_max_n**d and n >= sum(scales):
            val = predicted_factor(scales, n, d, ConvMode.VALID)
        rows.append({"n": n, "cyclic": cyc, "valid": val, "asymptotic": asym})
    return rows


