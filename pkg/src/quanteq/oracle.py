"""Brute-force equilibrium verification.

Everything here recomputes equilibria from the defining best-response
equations using QUADPACK integrals of hand-written density expressions: no
closed-form truncated moments, no solver kernels, no code shared with the
production path. Slow and small-N by design; used to certify the solvers
and every derived constant in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy.integrate import quad

from .distributions import (CustomDensity, Exponential, Gaussian,
                            SourceDistribution, Uniform)
from .errors import NoEquilibrium
from .equilibrium import EquilibriumStatus, GameConfig, solve_shooting

__all__ = [
    "GridSearchSpec",
    "brute_force_two_bin",
    "brute_force_equilibrium",
    "uniform_closed_form",
    "default_grid",
    "comparison_matrix",
    "VerifyRow",
]

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)


@dataclass(frozen=True)
class GridSearchSpec:
    """Scan bracket for the trial edge, grid resolution, bisection passes."""

    bracket: tuple[float, float]
    resolution: int = 64
    refine_passes: int = 100

    def __post_init__(self) -> None:
        if self.resolution < 3:
            raise ValueError("resolution must be >= 3")
        if not self.bracket[0] < self.bracket[1]:
            raise ValueError("bracket must be a nonempty interval")


def _raw_pdf(d: SourceDistribution) -> tuple[Callable[[float], float], float, float]:
    """Hand-written density plus a finite integration window."""
    if isinstance(d, Exponential):
        lam = d.rate
        return (lambda x: lam * math.exp(-lam * x) if x >= 0 else 0.0,
                0.0, 60.0 / lam)
    if isinstance(d, Gaussian):
        mu, sig = d.mu, d.sigma
        c = 1.0 / (sig * math.sqrt(2.0 * math.pi))
        return (lambda x: c * math.exp(-0.5 * ((x - mu) / sig) ** 2),
                mu - 12.0 * sig, mu + 12.0 * sig)
    if isinstance(d, Uniform):
        lo, hi = d.lower, d.upper
        c = 1.0 / (hi - lo)
        return (lambda x: c if lo <= x <= hi else 0.0, lo, hi)
    if isinstance(d, CustomDensity):
        lo, hi = d._quadrature_window()
        return d.pdf, lo, hi
    raise TypeError(f"no oracle density for {type(d).__name__}")


def _oracle_mean(d: SourceDistribution, a: float, b: float) -> float:
    pdf, wlo, whi = _raw_pdf(d)
    a, b = max(a, wlo), min(b, whi)
    if not a < b:
        return math.nan
    mass = quad(pdf, a, b, **_QUAD_OPTS)[0]
    if mass <= 1e-13:
        return math.nan
    m1 = quad(lambda x: x * pdf(x), a, b, **_QUAD_OPTS)[0]
    return m1 / mass


def default_spec(d: SourceDistribution) -> GridSearchSpec:
    # keep the trial edge where its outermost bin holds >= ~1e-9 mass, so a
    # NaN centroid can only mean the chain genuinely ran out of room
    return GridSearchSpec(bracket=(d.quantile(1e-9), d.quantile(1.0 - 1e-9)))


def brute_force_two_bin(d: SourceDistribution, bias: float,
                        spec: GridSearchSpec | None = None) -> tuple[float, ...]:
    """Scan the two-bin fixed-point defect m~(m) - m for a sign change and
    bisect it to a root."""
    if spec is None:
        spec = default_spec(d)
    _, wlo, whi = _raw_pdf(d)

    def defect(m: float) -> float:
        u1 = _oracle_mean(d, wlo, m)
        u2 = _oracle_mean(d, m, whi)
        return 0.5 * (u1 + u2) + bias - m

    lo, hi = spec.bracket
    xs = [lo + (hi - lo) * i / (spec.resolution - 1)
          for i in range(spec.resolution)]
    vals = [defect(x) for x in xs]
    for (x0, v0), (x1, v1) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        if math.isnan(v0) or math.isnan(v1):
            continue
        if v0 == 0.0:
            return (x0,)
        if (v0 > 0) != (v1 > 0):
            a, fa, b = x0, v0, x1
            for _ in range(spec.refine_passes):
                m = 0.5 * (a + b)
                fm = defect(m)
                if (fa > 0) == (fm > 0):
                    a, fa = m, fm
                else:
                    b = m
                if b - a <= 1e-12 * max(1.0, abs(m)):
                    break
            return (0.5 * (a + b),)
    raise NoEquilibrium("two-bin defect has no sign change over the bracket")


def _oracle_chain(d: SourceDistribution, x: float, bins: int, bias: float,
                  descending: bool) -> tuple[list[float], float] | None:
    """Forward propagation with QUADPACK centroids; None when it truncates."""
    pdf, wlo, whi = _raw_pdf(d)
    u = _oracle_mean(d, x, whi) if descending else _oracle_mean(d, wlo, x)
    if math.isnan(u):
        return None
    edges = [x]
    m = x
    for _ in range(bins - 2):
        target = 2.0 * m - u - 2.0 * bias
        if descending:
            if not target < m or target <= _oracle_mean(d, wlo, m):
                return None
            t_lo, t_hi = wlo, m
        else:
            if not target > m or target >= _oracle_mean(d, m, whi):
                return None
            t_lo, t_hi = m, whi
        # the conditional mean grows with either endpoint, so bisect on it
        for _ in range(120):
            mid = 0.5 * (t_lo + t_hi)
            v = (_oracle_mean(d, mid, m) if descending
                 else _oracle_mean(d, m, mid)) - target
            if math.isnan(v):
                return None
            if v < 0:
                t_lo = mid
            else:
                t_hi = mid
            if t_hi - t_lo <= 1e-13 * max(1.0, abs(mid)):
                break
        t = 0.5 * (t_lo + t_hi)
        edges.append(t)
        m, u = t, target
    utilde = 2.0 * m - u - 2.0 * bias
    ubar = _oracle_mean(d, wlo, m) if descending else _oracle_mean(d, m, whi)
    return edges, utilde - ubar


def brute_force_equilibrium(d: SourceDistribution, bias: float, bins: int,
                            spec: GridSearchSpec | None = None
                            ) -> tuple[float, ...]:
    """Grid-scan the last-bin mismatch of the forward construction over the
    trial first edge; bisect the sign change. Capped at four bins."""
    if bins > 4:
        raise ValueError("the brute-force oracle is limited to bins <= 4")
    if bins == 1:
        return ()
    if spec is None:
        spec = default_spec(d)
    descending = bias > 0

    def residual(x: float) -> float:
        out = _oracle_chain(d, x, bins, bias, descending)
        if out is None:
            return math.inf if not descending else -math.inf
        return out[1]

    lo, hi = spec.bracket
    xs = [lo + (hi - lo) * i / (spec.resolution - 1)
          for i in range(spec.resolution)]
    vals = [residual(x) for x in xs]
    for (x0, v0), (x1, v1) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        if (v0 > 0) != (v1 > 0):
            a, fa, b = x0, v0, x1
            for _ in range(spec.refine_passes):
                m = 0.5 * (a + b)
                fm = residual(m)
                if (fa > 0) == (fm > 0):
                    a, fa = m, fm
                else:
                    b = m
                if b - a <= 1e-12 * max(1.0, abs(m)):
                    break
            root = 0.5 * (a + b)
            out = _oracle_chain(d, root, bins, bias, descending)
            if out is None:
                break
            edges = sorted(out[0])
            return tuple(edges)
    raise NoEquilibrium(
        f"no {bins}-bin root of the shooting mismatch over the bracket")


def uniform_closed_form(bias: float, bins: int) -> tuple[float, ...]:
    """Exact uniform-source equilibrium edges m_k = k/N + 2 b k (N - k).

    Raises :class:`NoEquilibrium` when the partition leaves (0, 1) or loses
    its ordering, i.e. when ``bins`` exceeds the uniform bin-count bound.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if bins == 1:
        return ()
    edges = [k / bins + 2.0 * bias * k * (bins - k) for k in range(1, bins)]
    prev = 0.0
    for m in edges:
        if not prev < m < 1.0:
            raise NoEquilibrium(
                f"uniform closed form infeasible for bias={bias}, N={bins}")
        prev = m
    return tuple(edges)


@dataclass(frozen=True)
class VerifyRow:
    family: str
    bias: float
    bins: int
    oracle_verdict: str
    solver_verdict: str
    max_edge_diff: float | None
    agree: bool


def default_grid() -> list[tuple[SourceDistribution, float, int]]:
    grid: list[tuple[SourceDistribution, float, int]] = []
    uni = Uniform(0.0, 1.0)
    expo = Exponential(1.0)
    gauss = Gaussian(0.0, 1.0)
    for b in (-0.2, -0.12, -0.05, -0.02, 0.02, 0.05, 0.12, 0.2):
        for n in (2, 3, 4):
            grid.append((uni, b, n))
    for b in (-0.2, -0.1, 0.0, 0.1, 0.25):
        for n in (2, 3, 4):
            grid.append((expo, b, n))
    for b in (-0.3, 0.0, 0.3):
        for n in (2, 3, 4):
            grid.append((gauss, b, n))
    return grid


def comparison_matrix(grid: Sequence[tuple[SourceDistribution, float, int]]
                      | None = None,
                      tol: float = 1e-7) -> list[VerifyRow]:
    """Oracle-vs-solver verdicts and edge agreement over an instance grid."""
    rows = []
    for d, bias, bins in (grid if grid is not None else default_grid()):
        try:
            oracle_edges = brute_force_equilibrium(d, bias, bins)
            overdict = "equilibrium"
        except NoEquilibrium:
            oracle_edges = None
            overdict = "none"
        try:
            res = solve_shooting(d, GameConfig(bias=bias, bins=bins))
            solver_edges = res.quantizer.edges
            sverdict = ("equilibrium"
                        if res.status is EquilibriumStatus.CONVERGED
                        else res.status.value)
        except NoEquilibrium:
            solver_edges = None
            sverdict = "none"
        diff = None
        agree = overdict == sverdict
        if agree and oracle_edges is not None and solver_edges is not None:
            diff = max((abs(a - b) for a, b
                        in zip(oracle_edges, solver_edges)), default=0.0)
            agree = diff <= tol
        rows.append(VerifyRow(family=d.kind, bias=bias, bins=bins,
                              oracle_verdict=overdict,
                              solver_verdict=sverdict,
                              max_edge_diff=diff, agree=agree))
    return rows
