"""Closed-form bin-count bounds and non-informativeness thresholds.

Formula evaluators for the bias regimes in which informative equilibria can
exist, across the uniform/exponential/Gaussian families and general sources
described by user-supplied tail constants. ``empirical_nmax`` complements
the printed bounds (which need not be sharp) by scanning the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import SourceDistribution
from .equilibrium import GameConfig, solve_shooting
from .errors import DomainError, NoEquilibrium, PropagationFailure

__all__ = [
    "TailAssumptions",
    "nmax_uniform",
    "noninformative_semi_unbounded",
    "gaussian_halfline_bound",
    "general_semi_unbounded_bound",
    "general_noninformative",
    "exponential_thresholds",
    "empirical_nmax",
]


@dataclass(frozen=True)
class TailAssumptions:
    """Tail constants certifying a semi-unbounded (or two-sided) source.

    ``E[M | M >= t] <= t + centroid_gap`` for every ``t >= tail_threshold``,
    with the pdf decreasing beyond it; the two optional lower-tail fields
    state the mirrored property below ``lower_threshold``.
    """

    support_lower: float
    tail_threshold: float
    centroid_gap: float
    lower_threshold: float | None = None
    lower_gap: float | None = None

    def __post_init__(self) -> None:
        if self.tail_threshold < self.support_lower:
            raise ValueError("tail_threshold must be >= support_lower")
        if self.centroid_gap < 0:
            raise ValueError("centroid_gap must be >= 0")
        if (self.lower_threshold is None) != (self.lower_gap is None):
            raise ValueError("lower_threshold and lower_gap come together")
        if self.lower_threshold is not None:
            if self.lower_threshold > self.tail_threshold:
                raise ValueError("lower_threshold must be <= tail_threshold")
            if self.lower_gap is not None and self.lower_gap < 0:
                raise ValueError("lower_gap must be >= 0")


def nmax_uniform(bias: float) -> int:
    """Largest equilibrium bin count for the uniform source on [0, 1]:
    ceil(-1/2 + sqrt(1 + 2/|b|)/2). Babbling only once |b| >= 1/4."""
    if bias == 0:
        raise DomainError("no finite bin-count bound at zero bias")
    return int(math.ceil(-0.5 + 0.5 * math.sqrt(1.0 + 2.0 / abs(bias))))


def noninformative_semi_unbounded(mu: float, boundary: float, side: str,
                                  bias: float) -> bool:
    """True when only the babbling equilibrium exists.

    ``side='lower'``: support [boundary, inf), condition 2b <= -(mu - m_L).
    ``side='upper'``: support (-inf, boundary], condition 2b >= m_U - mu.
    """
    if side == "lower":
        return 2.0 * bias <= -(mu - boundary)
    if side == "upper":
        return 2.0 * bias >= boundary - mu
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def gaussian_halfline_bound(sigma: float, bias: float) -> int:
    """Bins a Gaussian equilibrium can place on the half-line the bias works
    against: floor(sigma / (2|b|)). For b < 0 that is [mu, inf); for b > 0,
    (-inf, mu]."""
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if bias == 0:
        raise DomainError("no finite half-line bound at zero bias")
    return int(math.floor(sigma / (2.0 * abs(bias))))


def general_semi_unbounded_bound(t: TailAssumptions, bias: float) -> int:
    """Bin-count bound for a certified semi-unbounded source with b < 0:
    floor((eta + (K - a)) / (2|b|) + 2)."""
    if bias >= 0:
        raise DomainError("the general bound applies to bias < 0 only")
    num = t.centroid_gap + (t.tail_threshold - t.support_lower)
    return int(math.floor(num / (2.0 * abs(bias)) + 2.0))


def general_noninformative(t: TailAssumptions, bias: float) -> bool:
    """True when b <= -(K + eta - a)/2, which rules out any informative
    equilibrium for a certified semi-unbounded source."""
    return bias <= -(t.tail_threshold + t.centroid_gap - t.support_lower) / 2.0


def exponential_thresholds(rate: float) -> dict[str, float]:
    """Exact bias thresholds below which 2-bin and 3-bin exponential
    equilibria stop existing."""
    if rate <= 0:
        raise DomainError("rate must be positive")
    return {
        "two_bin": -0.5 / rate,
        "three_bin": -0.5 / rate * (math.e - 2.0) / (math.e - 1.0),
    }


def empirical_nmax(d: SourceDistribution, bias: float, cap: int = 64) -> int:
    """Largest N for which the shooting solver finds an equilibrium.

    Empirical: scans N upward (existence is downward closed) until the
    solver reports no equilibrium, up to ``cap``.
    """
    best = 1
    for n in range(2, cap + 1):
        try:
            solve_shooting(d, GameConfig(bias=bias, bins=n))
        except (NoEquilibrium, PropagationFailure):
            break
        best = n
    return best
