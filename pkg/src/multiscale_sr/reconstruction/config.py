from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..signals import GridSignal


class Method(str, enum.Enum):
    FOURIER = "fourier"
    LSQR = "lsqr"
    LOCAL = "local"
    DENSE_ORACLE = "oracle"


class PadPolicy(str, enum.Enum):
    REJECT = "reject"
    ZERO_PAD = "zero"
    REFLECT_PAD = "reflect"


@dataclass(frozen=True)
class ReconstructionConfig:
    method: Method = Method.FOURIER
    lam: float = 0.0
    max_iter: int | None = None  # LSQR default: 10 * number of pixels
    tol: float = 1e-10
    pad_policy: PadPolicy = PadPolicy.REJECT

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "pad_policy", PadPolicy(self.pad_policy))
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.method is Method.LOCAL and self.lam != 0:
            raise ValueError("local reconstruction does not take a regularization weight")


@dataclass
class ReconstructionResult:
    signal: GridSignal
    method: Method
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    wall_ms: float = 0.0
    info: dict = field(default_factory=dict)

    def report(self) -> dict:
        return {
            "method": self.method.value,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "wall_ms": self.wall_ms,
            **self.info,
        }
