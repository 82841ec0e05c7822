"""Synthetic test targets with values in [0, 1]."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .io import read_signal
from .signals import GridSignal


class TargetKind(str, enum.Enum):
    GRATING = "grating"
    PINWHEEL = "pinwheel"
    CHECKER = "checker"
    USAF_LIKE = "usaf"
    RANDOM = "random"
    FROM_FILE = "file"


@dataclass(frozen=True)
class TargetSpec:
    kind: TargetKind
    shape: tuple[int, ...]
    seed: int = 0
    period: int = 1  # checker cell size
    bar_start: int = 2  # grating: width of the first bar
    bar_growth: float = 1.0  # grating: width increment per bar
    sectors: int = 36  # pinwheel: number of black + white sectors
    low: float = 0.0
    high: float = 1.0
    path: str | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", TargetKind(self.kind))
        shape = (self.shape,) if isinstance(self.shape, int) else tuple(int(s) for s in self.shape)
        object.__setattr__(self, "shape", shape)
        if self.kind is not TargetKind.FROM_FILE:
            if len(shape) not in (1, 2) or min(shape) < 1:
                raise ValueError(f"bad target shape {shape}")
        if not 0.0 <= self.low <= 1.0 or not 0.0 <= self.high <= 1.0:
            raise ValueError("contrast levels must lie in [0, 1]")
        if self.period < 1 or self.bar_start < 1 or self.bar_growth < 0 or self.sectors < 2:
            raise ValueError("target parameters out of range")
        if self.kind is TargetKind.FROM_FILE and not self.path:
            raise ValueError("FROM_FILE targets need a path")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value, "shape": list(self.shape), "seed": self.seed,
            "period": self.period, "bar_start": self.bar_start, "bar_growth": self.bar_growth,
            "sectors": self.sectors, "low": self.low, "high": self.high, "path": self.path,
        }


def make_target(spec: TargetSpec) -> GridSignal:
    kind = spec.kind
    if kind is TargetKind.RANDOM:
        rng = np.random.default_rng(spec.seed)
        return GridSignal(spec.low + (spec.high - spec.low) * rng.random(spec.shape))
    if kind is TargetKind.FROM_FILE:
        return _from_file(spec)
    if kind is TargetKind.GRATING:
        mask = grating_mask(spec.shape[0], spec.bar_start, spec.bar_growth)
        if len(spec.shape) == 2:
            mask = np.repeat(mask[:, None], spec.shape[1], axis=1)
    elif kind is TargetKind.CHECKER:
        idx = np.indices(spec.shape) // spec.period
        mask = idx.sum(axis=0) % 2 == 0
    elif kind is TargetKind.PINWHEEL:
        mask = _pinwheel(spec.shape, spec.sectors)
    else:
        mask = _usaf(spec.shape)
    return GridSignal(np.where(mask, spec.high, spec.low))


def grating_mask(n: int, start: int = 2, growth: float = 1.0) -> np.ndarray:
    """Bars whose width (and the following gap) grows linearly along the axis."""
    mask = np.zeros(n, dtype=bool)
    pos, i = 0, 0
    while pos < n:
        w = int(round(start + growth * i))
        mask[pos:pos + w] = True
        pos += 2 * w
        i += 1
    return mask


def grating_bars(n: int, start: int = 2, growth: float = 1.0) -> list[tuple[int, int]]:
    """``(offset, width)`` of each bar of :func:`grating_mask`."""
    bars, pos, i = [], 0, 0
    while pos < n:
        w = int(round(start + growth * i))
        bars.append((pos, min(w, n - pos)))
        pos += 2 * w
        i += 1
    return bars


def _pinwheel(shape, sectors: int) -> np.ndarray:
    if len(shape) == 1:
        shape = (shape[0], 1)
        squeeze = True
    else:
        squeeze = False
    r, c = np.indices(shape, dtype=float)
    theta = np.arctan2(r - (shape[0] - 1) / 2, c - (shape[1] - 1) / 2)
    mask = np.floor(sectors * (theta + np.pi) / (2 * np.pi)).astype(int) % 2 == 0
    return mask[:, 0] if squeeze else mask


def _usaf(shape) -> np.ndarray:
    """Groups of three bars at shrinking sizes, alternating orientation."""
    two_d = len(shape) == 2
    n0 = shape[0]
    n1 = shape[1] if two_d else 1
    mask = np.zeros((n0, n1), dtype=bool)
    size = max(1, min(n0, n1 if two_d else n0) // 10)
    r = 1
    c = 1 if two_d else 0
    vertical = True
    while size >= 1 and r + 5 * size < n0:
        length = 5 * size
        for b in range(3):
            off = 2 * b * size
            if vertical or not two_d:
                mask[r + off: r + off + size, c: c + length] = True
            else:
                mask[r: r + length, c + off: c + off + size] = True
        if two_d:
            c += 6 * size
            if c + 5 * size >= n1:
                c = 1
                r += 6 * size
        else:
            r += 6 * size
        vertical = not vertical
        if vertical:
            size -= 1
    return mask if two_d else mask[:, 0]


def _from_file(spec: TargetSpec) -> GridSignal:
    values = read_signal(Path(spec.path)).values
    lo, hi = values.min(), values.max()
    if lo < 0 or hi > 1:
        values = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    return GridSignal(values)
