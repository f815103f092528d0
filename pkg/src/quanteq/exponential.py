"""Closed-form machinery for the exponential source.

The bin-length recursion, the Lambert-W two-bin solution, the equal-length
infinite-bin fixed point and its limiting decoder cost. Everything here is a
pure function of (rate, bias).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import DomainError, NoEquilibrium

__all__ = [
    "RecursionState",
    "g",
    "h",
    "lambert_w",
    "two_bin_edge",
    "backward_recursion",
    "infinite_bin_length",
    "nmax_exponential",
    "infinite_cost",
]

_BRANCH_POINT = -math.exp(-1.0)


def h(x: float, rate: float = 1.0) -> float:
    """x / (e^{rate*x} - 1), extended by continuity to h(0) = 1/rate.

    Strictly decreasing on [0, inf) with values in (0, 1/rate].
    """
    if x < 0.0:
        raise DomainError("h is defined for x >= 0")
    t = rate * x
    if t < 1e-6:
        # 3-term series; avoids 0/0 at the origin
        return (1.0 - 0.5 * t + t * t / 12.0) / rate
    return x / math.expm1(t)


def g(x: float, rate: float = 1.0) -> float:
    """x e^{rate*x} / (e^{rate*x} - 1) = h(x) + x; increasing, infimum 1/rate."""
    if x < 0.0:
        raise DomainError("g is defined for x >= 0")
    return h(x, rate) + x


def lambert_w(branch: Literal["W0", "Wm1"], x: float) -> float:
    """Real Lambert W: solve w e^w = x on the requested branch.

    ``W0`` is the principal branch (w >= -1, defined for x >= -1/e);
    ``Wm1`` the lower branch (w <= -1, defined for -1/e <= x < 0).
    Halley iteration from a branch-specific initial guess.
    """
    if branch not in ("W0", "Wm1"):
        raise ValueError(f"unknown branch {branch!r}")
    if x < _BRANCH_POINT:
        raise DomainError(f"lambert_w requires x >= -1/e, got {x}")
    if x == _BRANCH_POINT:
        return -1.0

    def _branch_series(p: float) -> float:
        # expansion around the branch point; Halley's correction is pure
        # noise this close, so return the series value directly
        return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0
                                                        - p * 43.0 / 540.0)))

    if branch == "Wm1":
        if x >= 0.0:
            raise DomainError("Wm1 requires x < 0")
        p = -math.sqrt(2.0 * (math.e * x + 1.0))
        if p > -1e-3:
            return _branch_series(p)
        lx = math.log(-x)
        if x > -0.25:
            w = lx - math.log(-lx)
        else:
            w = _branch_series(p)
    else:
        if x == 0.0:
            return 0.0
        if x < 0.0:
            p = math.sqrt(2.0 * (math.e * x + 1.0))
            if p < 1e-3:
                return _branch_series(p)
        if abs(x) < 0.3:
            w = x * (1.0 - x + 1.5 * x * x)
        elif x < math.e:
            w = 0.5 * math.log1p(x) + 0.2
        else:
            lx = math.log(x)
            w = lx - math.log(lx)
        if x < -0.27:
            w = _branch_series(math.sqrt(2.0 * (math.e * x + 1.0)))
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    # near the branch point a step can stray across w = -1; pin the branch
    if branch == "W0" and w < -1.0:
        w = -1.0
    elif branch == "Wm1" and w > -1.0:
        w = -1.0
    return w


def two_bin_edge(rate: float, bias: float) -> float:
    """Single bin edge of the two-bin exponential equilibrium.

    Exists (positive) precisely when ``bias > -1/(2*rate)``.
    """
    if rate <= 0:
        raise DomainError("rate must be positive")
    if bias <= -0.5 / rate:
        raise NoEquilibrium(
            f"two-bin exponential equilibrium needs bias > {-0.5 / rate}")
    y = 2.0 + 2.0 * rate * bias  # > 1
    w = lambert_w("W0", -y * math.exp(-y))
    return w / rate + 2.0 * (1.0 / rate + bias)


@dataclass(frozen=True)
class RecursionState:
    """Finite bin lengths of an N-bin exponential equilibrium.

    ``lengths[k]`` is the width of bin ``k+1``; the last bin is the infinite
    tail and has no entry.
    """

    rate: float
    bias: float
    lengths: tuple[float, ...]

    @property
    def bins(self) -> int:
        return len(self.lengths) + 1

    @property
    def edges(self) -> tuple[float, ...]:
        out = []
        s = 0.0
        for l in self.lengths:
            s += l
            out.append(s)
        return tuple(out)


def _invert_g(target: float, rate: float) -> float:
    """Unique x > 0 with g(x) = target; requires target > 1/rate."""
    lo = 0.0
    hi = 10.0 / rate
    grow = 0
    while g(hi, rate) < target:
        hi *= 2.0
        grow += 1
        if grow > 200:
            raise DomainError("g inversion bracket failed to grow")
    while hi - lo > 1e-16 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid, rate) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def backward_recursion(rate: float, bias: float, bins: int) -> RecursionState:
    """Solve the bin-length recursion from the tail bin downward.

    Raises :class:`NoEquilibrium` when some inversion target drops to the
    infimum of ``g`` (no positive length continues the chain), which is
    exactly the non-existence condition for an N-bin equilibrium.
    """
    if rate <= 0:
        raise DomainError("rate must be positive")
    if bins < 2:
        raise DomainError("the recursion needs at least two bins")
    c = 2.0 / rate + 2.0 * bias
    inf_g = 1.0 / rate
    rev: list[float] = []
    target = c
    for _ in range(bins - 1):
        if target <= inf_g * (1.0 + 1e-15):
            raise NoEquilibrium(
                f"no equilibrium with {bins} bins: recursion target {target} "
                f"at or below the infimum {inf_g} of g")
        length = _invert_g(target, rate)
        rev.append(length)
        target = c - h(length, rate)
    return RecursionState(rate=rate, bias=bias, lengths=tuple(reversed(rev)))


def infinite_bin_length(rate: float, bias: float) -> float:
    """Common bin length l* of the infinite-bin equilibrium (bias > 0).

    Unique root of (c - s) e^{rate*s} - (c + s) on (2*bias, c) with
    c = 2/rate + 2*bias.
    """
    if rate <= 0:
        raise DomainError("rate must be positive")
    if bias <= 0:
        raise DomainError("the infinite-bin equilibrium requires bias > 0")
    c = 2.0 / rate + 2.0 * bias

    def psi(s: float) -> float:
        return (c - s) * math.exp(rate * s) - (c + s)

    lo, hi = 2.0 * bias, c
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if psi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nmax_exponential(rate: float, bias: float) -> int:
    """Upper bound on the equilibrium bin count for negative bias.

    floor(-1/(2*bias*rate) + 1); below the two-bin threshold only the single
    babbling bin remains.
    """
    if rate <= 0:
        raise DomainError("rate must be positive")
    if bias >= 0:
        raise DomainError("the bin-count bound applies to bias < 0 only")
    if bias <= -0.5 / rate:
        return 1
    return int(math.floor(-1.0 / (2.0 * bias * rate) + 1.0))


def infinite_cost(rate: float, bias: float) -> float:
    """Decoder cost of the infinite-bin equilibrium (bias > 0).

    1/rate^2 - (l*)^2 / (e^{rate l*} + e^{-rate l*} - 2); the infimum of the
    N-bin equilibrium costs.
    """
    lstar = infinite_bin_length(rate, bias)
    t = rate * lstar
    return 1.0 / rate**2 - lstar * lstar / (math.exp(t) + math.exp(-t) - 2.0)
