"""Singular-value analysis of cyclic multiscale box operators.

A cyclic box convolution is diagonalised by the DFT, so the stacked operator
has one singular value per grid frequency. Everything here works with MEAN
normalised boxes (unit DC gain); UNIT profiles scale each scale's factor by
``k**d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .signals import ConvMode, Normalization, dense_operator


class NonInvertibleError(ArithmeticError):
    """The least-squares problem has a zero singular value."""

    def __init__(self, message: str, frequency: tuple[int, ...] | None = None):
        super().__init__(message)
        self.frequency = frequency


def periodic_sinc(k: int, omega):
    """``sin(k w / 2) / (k sin(w / 2))`` extended continuously to ``[0, 2pi]``.

    Accepts scalars or arrays. At ``w = 0`` the value is 1; at ``w = 2pi`` the
    continuous extension is ``(-1)**(k + 1)``.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"box size must be a positive integer, got {k}")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(w > 2 * np.pi):
        raise ValueError("frequency must lie in [0, 2*pi]")
    den = k * np.sin(w / 2)
    num = np.sin(k * w / 2)
    limit = np.where(w == 2 * np.pi, (-1.0) ** (k + 1), 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, limit, num / np.where(den == 0, 1.0, den))
    out = np.clip(out, -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def grid_frequencies(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def zero_mask(k: int, n: int) -> np.ndarray:
    """Exact membership of ``2 pi j / n`` in the zero set ``{2 pi m / k}``.

    ``2 pi j / n`` is a zero iff ``j != 0`` and ``j * k`` is divisible by ``n``;
    integer arithmetic only.
    """
    j = np.arange(n)
    return (j != 0) & ((j * k) % n == 0)


def sinc_on_grid(k: int, n: int) -> np.ndarray:
    """``f_k`` sampled on ``(2 pi / n) [n]`` with exact zeros forced to 0."""
    vals = periodic_sinc(k, grid_frequencies(n))
    vals = np.atleast_1d(vals).copy()
    vals[zero_mask(k, n)] = 0.0
    return vals


def box_dft(k: int, n: int, d: int = 1) -> np.ndarray:
    """DFT of the MEAN box of size ``k`` on an ``n``-point grid (per axis).

    Uses ``b_k(w) = exp(-i (k-1) w / 2) f_k(w)``; for ``d = 2`` the result is
    the outer product of the 1-D transforms.
    """
    if k > n:
        raise ValueError(f"box size {k} exceeds grid length {n}")
    w = grid_frequencies(n)
    one = np.exp(-0.5j * (k - 1) * w) * sinc_on_grid(k, n)
    if d == 1:
        return one
    if d == 2:
        return np.outer(one, one)
    raise ValueError("d must be 1 or 2")


def transfer_function(k: int, shape: Sequence[int], norm: Normalization = Normalization.MEAN) -> np.ndarray:
    """DFT eigenvalues of the cyclic measurement ``y(a) = sum_{i<k} u(a+i)``.

    Windows start at ``a``, which is a correlation with the box, so the
    eigenvalues are the complex conjugate of :func:`box_dft`.
    """
    out = np.ones(tuple(shape), dtype=complex)
    for axis, n in enumerate(shape):
        w = grid_frequencies(n)
        one = np.exp(0.5j * (k - 1) * w) * sinc_on_grid(k, n) if k <= n else _long_box(k, n)
        out = out * one.reshape([-1 if a == axis else 1 for a in range(len(shape))])
    if Normalization(norm) is Normalization.UNIT:
        out = out * k ** len(shape)
    return out


def _long_box(k: int, n: int) -> np.ndarray:
    # cyclic windows longer than the signal wrap several times
    kernel = np.bincount(np.arange(k) % n, minlength=n) / k
    return np.conj(np.fft.fft(kernel))


def near_zero_count(k: int, n: int, d: int = 1, epsilon: float = 1e-2) -> int:
    """Number of grid frequencies where ``|b_k| <= epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    mag = np.abs(sinc_on_grid(k, n))
    if d == 1:
        return int(np.count_nonzero(mag <= epsilon))
    full = mag
    for _ in range(d - 1):
        full = np.multiply.outer(full, mag)
    return int(np.count_nonzero(full <= epsilon))


def near_zero_lower_bound(k: int, n: int, d: int) -> int:
    """``d (k-1) n^(d-1) - C(d,2) (k-1)^2 n^(d-2)``."""
    return d * (k - 1) * n ** (d - 1) - math.comb(d, 2) * (k - 1) ** 2 * n ** (d - 2)


def pairwise_coprime(scales: Sequence[int]) -> bool:
    return all(math.gcd(a, b) == 1 for a, b in combinations(scales, 2))


def has_common_zero(scales: Sequence[int], d: int) -> bool:
    """Whether the continuous profile ``f`` vanishes somewhere on ``[0, 2pi]^d``.

    A scale of 1 never vanishes. Otherwise ``f`` has a zero iff the scales are
    not pairwise coprime or there are at most ``d`` of them.
    """
    if min(scales) == 1:
        return False
    return not pairwise_coprime(scales) or len(scales) <= d


def zero_sets_disjoint(k1: int, k2: int) -> bool:
    """Whether ``Z_k1`` and ``Z_k2`` share no point, using exact fractions of 2pi."""
    z1 = {Fraction(m, k1) for m in range(1, k1)}
    z2 = {Fraction(m, k2) for m in range(1, k2)}
    return not (z1 & z2)


@dataclass(frozen=True)
class SpectralProfile:
    """Singular values of the cyclic stacked operator on the DFT grid."""

    dims: int
    n: int
    scales: tuple[int, ...]
    sigma_values: np.ndarray
    normalization: Normalization = Normalization.MEAN

    @property
    def max_value(self) -> float:
        return float(self.sigma_values.max())

    @property
    def min_value(self) -> float:
        return float(self.sigma_values.min())

    @property
    def argmin(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(np.argmin(self.sigma_values), self.sigma_values.shape))

    @property
    def invertible(self) -> bool:
        return self.min_value > 0

    @property
    def coprime(self) -> bool:
        return pairwise_coprime(self.scales)

    def frequencies(self) -> np.ndarray:
        return grid_frequencies(self.n)


def stacked_profile(scales: Sequence[int], n: int, d: int = 1,
                    normalization: Normalization = Normalization.MEAN) -> SpectralProfile:
    """``f(w) = sqrt(sum_j prod_l f_kj(w_l)^2)`` on the grid ``(2pi/n)[n]^d``."""
    scales = tuple(int(k) for k in scales)
    if not scales:
        raise ValueError("at least one scale is required")
    if d not in (1, 2):
        raise ValueError("d must be 1 or 2")
    norm = Normalization(normalization)
    power = np.zeros((n,) * d)
    for k in scales:
        g = np.abs(transfer_function(k, (n,), Normalization.MEAN)) ** 2 if k > n else sinc_on_grid(k, n) ** 2
        term = g if d == 1 else np.multiply.outer(g, g)
        if norm is Normalization.UNIT:
            term = term * float(k) ** (2 * d)
        power = power + term
    return SpectralProfile(d, n, scales, np.sqrt(power), norm)


def condition_number(profile: SpectralProfile) -> float:
    """``max / min`` singular value; ``inf`` when some singular value is zero."""
    lo = profile.min_value
    if lo == 0:
        return math.inf
    return profile.max_value / lo


def finite_condition_number(profile: SpectralProfile) -> float:
    """Largest ratio over the non-zero singular values."""
    nz = profile.sigma_values[profile.sigma_values > 0]
    return float(nz.max() / nz.min()) if nz.size else math.inf


@dataclass(frozen=True)
class ErrorPrediction:
    trace_normalized: float
    rmse_factor: float
    asymptotic_value: float
    lower_bound: float
    sigma: float = 1.0

    @property
    def expected_mse(self) -> float:
        """Predicted ``E ||u_hat - u||^2 / n^d``."""
        return self.sigma**2 * self.trace_normalized


def tradeoff_lower_bound(scales: Sequence[int], d: int) -> float:
    """``k^d / s`` with ``k`` the smallest scale and ``s`` the number of scales.

    For ``s = d + 1`` scales this is the ``k^d / (d + 1)`` noise-resolution
    bound. It follows from Jensen's inequality and the box energy identity
    ``mean(f_k^2) = 1 / k``, which also holds exactly on the discrete grid.
    """
    return min(scales) ** d / len(scales)


def predicted_mse(profile: SpectralProfile, sigma: float = 1.0, asymptotic: bool = True) -> ErrorPrediction:
    """Least-squares error law ``E ||u_hat - u||^2 = sigma^2 tr((T'T)^-1)``."""
    if not profile.invertible:
        idx = profile.argmin
        raise NonInvertibleError(
            f"zero singular value at frequency index {idx} for scales {profile.scales}", idx)
    trace = float(np.mean(1.0 / profile.sigma_values**2))
    asym = math.nan
    if asymptotic and not has_common_zero(profile.scales, profile.dims):
        if profile.normalization is Normalization.MEAN:
            asym = asymptotic_trace(profile.scales, profile.dims)
    bound = tradeoff_lower_bound(profile.scales, profile.dims)
    if profile.normalization is Normalization.UNIT:
        bound = math.nan
    return ErrorPrediction(trace, math.sqrt(trace), asym, bound, sigma)


def _midpoint_trace(scales: Sequence[int], d: int, grid: int) -> float:
    w = 2 * np.pi * (np.arange(grid) + 0.5) / grid
    power = np.zeros((grid,) * d)
    for k in scales:
        g = periodic_sinc(k, w) ** 2
        power = power + (g if d == 1 else np.multiply.outer(g, g))
    return float(np.mean(1.0 / power))


def asymptotic_trace(scales: Sequence[int], d: int = 1, grid: int | None = None,
                     rtol: float = 1e-4, max_grid: int | None = None) -> float:
    """Large-``n`` limit of ``tr((T'T)^-1) / n^d`` by midpoint quadrature.

    The per-axis point count is a multiple of every scale (so midpoints avoid
    the zeros of each sinc) and is doubled until the relative change drops
    below ``rtol``.
    """
    scales = tuple(int(k) for k in scales)
    if has_common_zero(scales, d):
        raise NonInvertibleError(f"scales {scales} leave a common zero in {d}-D; the integrand is singular")
    base = math.lcm(*scales)
    if grid is None:
        grid = 64 if d == 1 else 32
    grid = base * max(1, math.ceil(grid / base))
    if max_grid is None:
        max_grid = 1 << 20 if d == 1 else 4096
    prev = _midpoint_trace(scales, d, grid)
    while grid * 2 <= max_grid:
        grid *= 2
        cur = _midpoint_trace(scales, d, grid)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    return prev


def continuum_minimum(scales: Sequence[int], d: int = 1, grid: int | None = None) -> float:
    """Sampled minimum ``M`` of ``f`` on a fine grid (not a certified bound)."""
    base = math.lcm(*scales)
    if grid is None:
        grid = base * max(4, math.ceil((4096 if d == 1 else 512) / base))
    w = 2 * np.pi * np.arange(grid + 1) / grid
    power = np.zeros((grid + 1,) * d)
    for k in scales:
        g = periodic_sinc(k, w) ** 2
        power = power + (g if d == 1 else np.multiply.outer(g, g))
    return float(np.sqrt(power.min()))


def valid_mode_trace(scales: Sequence[int], n: int, d: int = 1,
                     normalization: Normalization = Normalization.MEAN) -> float:
    """``tr((T'T)^-1) / n^d`` for the explicit VALID-convolution matrix."""
    T = dense_operator((n,) * d, scales, ConvMode.VALID, normalization)
    s = np.linalg.svd(T, compute_uv=False)
    if s.size < n**d or s.min() <= s.max() * max(T.shape) * np.finfo(float).eps:
        raise NonInvertibleError(f"VALID operator for scales {tuple(scales)} at n={n} is rank deficient")
    return float(np.sum(1.0 / s**2) / n**d)


def cyclic_dense_trace(scales: Sequence[int], n: int, d: int = 1,
                       normalization: Normalization = Normalization.MEAN) -> float:
    """Dense-matrix ``tr((T'T)^-1) / n^d`` for the cyclic operator (oracle)."""
    T = dense_operator((n,) * d, scales, ConvMode.CYCLIC, normalization)
    gram = T.T @ T
    return float(np.trace(np.linalg.inv(gram)) / n**d)
