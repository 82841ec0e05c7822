"""Integer plans for local reconstruction from coprime box sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class BezoutPlan:
    """Multipliers with ``m2 * k2 == m1 * k1 + 1``.

    Aggregating scale ``k1`` by ``m1`` and scale ``k2`` by ``m2`` yields a pair
    of adjacent box sizes ``k`` and ``k + 1``.
    """

    k1: int
    k2: int
    m1: int
    m2: int

    @property
    def k(self) -> int:
        return self.m1 * self.k1

    def check(self) -> None:
        if self.m2 * self.k2 != self.m1 * self.k1 + 1:
            raise PlanError(f"{self.m2}*{self.k2} != {self.m1}*{self.k1} + 1")


def bezout_plan(k1: int, k2: int) -> BezoutPlan:
    """Smallest positive ``m1`` (hence ``m1 <= k2`` and ``m2 <= k1``)."""
    if k1 < 1 or k2 < 1:
        raise PlanError("box sizes must be positive")
    if math.gcd(k1, k2) != 1:
        raise PlanError(f"box sizes {k1} and {k2} are not coprime")
    if k2 == 1:
        # every k1-multiple plus one is a multiple of 1; m2 <= k1 needs k1 >= 2
        m1 = 1
    else:
        # m1 * k1 == -1 (mod k2)
        m1 = (-pow(k1, -1, k2)) % k2
    m2 = (m1 * k1 + 1) // k2
    plan = BezoutPlan(k1, k2, m1, m2)
    plan.check()
    return plan


@dataclass(frozen=True)
class CrtPlan:
    """Box sizes relabelled so ``k3`` is odd, with ``k = m1 k1``,
    ``k + 1 = m2 k2`` and ``2k + 1 = m3 k3``."""

    k1: int
    k2: int
    k3: int
    k: int
    m1: int
    m2: int
    m3: int

    @property
    def scales(self) -> tuple[int, int, int]:
        return (self.k1, self.k2, self.k3)

    @property
    def multipliers(self) -> tuple[int, int, int]:
        return (self.m1, self.m2, self.m3)

    def check(self) -> None:
        ok = (self.k == self.m1 * self.k1 and self.k + 1 == self.m2 * self.k2
              and 2 * self.k + 1 == self.m3 * self.k3)
        if not ok:
            raise PlanError(f"inconsistent plan {self}")
        if max(self.multipliers) > self.k1 * self.k2 * self.k3:
            raise PlanError("multipliers exceed k1*k2*k3")


def crt_plan(k1: int, k2: int, k3: int) -> CrtPlan:
    """Smallest ``k >= 1`` solving the three congruences.

    The given order is kept when ``k3`` is odd; otherwise ``k3`` is swapped
    with the last odd size among ``k1, k2``.
    """
    ks = [k1, k2, k3]
    if min(ks) < 1:
        raise PlanError("box sizes must be positive")
    if any(math.gcd(a, b) != 1 for a, b in ((k1, k2), (k1, k3), (k2, k3))):
        raise PlanError(f"box sizes {tuple(ks)} are not pairwise coprime")
    if ks[2] % 2 == 0:
        j = 1 if ks[1] % 2 else 0
        ks[2], ks[j] = ks[j], ks[2]
    a, b, c = ks
    # k ranges over multiples of a; the solution is unique modulo a*b*c
    for m1 in range(1, b * c + 1):
        k = m1 * a
        if (k + 1) % b == 0 and (2 * k + 1) % c == 0:
            plan = CrtPlan(a, b, c, k, m1, (k + 1) // b, (2 * k + 1) // c)
            plan.check()
            return plan
    raise PlanError(f"no CRT solution for {tuple(ks)}")  # unreachable for coprime input
