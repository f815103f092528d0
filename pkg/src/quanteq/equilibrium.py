"""Equilibrium solvers for the quadratic cheap-talk quantizer game.

Two independent routes to the same fixed point:

* :func:`solve_lloyd_max` — best-response iteration (decoder centroid sweep
  followed by the biased nearest-neighbor sweep), run to a sup-norm fixed
  point. Closed-form families execute inside the compiled kernel.
* :func:`solve_shooting` — the monotone forward construction: pick a trial
  outermost edge, propagate the indifference recursion bin by bin, and drive
  the final centroid mismatch to zero by bisection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .distributions import SourceDistribution, SupportSpec
from .errors import (BinCollapse, NoEquilibrium, PropagationFailure,
                     ZeroMassInterval)

__all__ = [
    "GameConfig",
    "Quantizer",
    "EquilibriumStatus",
    "EquilibriumResult",
    "UniquenessReport",
    "MERGE_TOL",
    "decoder_best_response",
    "encoder_best_response",
    "quantizer_from_edges",
    "lloyd_max_step",
    "solve_lloyd_max",
    "solve_shooting",
    "babbling_equilibrium",
    "uniqueness_probe",
    "fixed_point_residuals",
]

# Edges closer than this are treated as a merged (collapsed) bin pair.
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class GameConfig:
    """Instance of the game: bias, bin count and solver stopping rules."""

    bias: float
    bins: int
    edge_tolerance: float = 1e-11
    max_iterations: int = 200_000

    def __post_init__(self) -> None:
        if self.bins < 1:
            raise ValueError("bins must be >= 1")
        if not self.edge_tolerance > 0:
            raise ValueError("edge_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class Quantizer:
    """Ordered bin edges with their decoder actions (centroids)."""

    edges: tuple[float, ...]
    centroids: tuple[float, ...]
    support: SupportSpec

    def __post_init__(self) -> None:
        if len(self.centroids) != len(self.edges) + 1:
            raise ValueError("need exactly one centroid per bin")
        lo, hi = self.support.lower, self.support.upper
        prev = lo
        for m in self.edges:
            if not prev < m < hi:
                raise ValueError(f"edge {m} outside ({prev}, {hi})")
            prev = m

    @property
    def bins(self) -> int:
        return len(self.edges) + 1

    def bin_bounds(self) -> list[tuple[float, float]]:
        cuts = [self.support.lower, *self.edges, self.support.upper]
        return list(zip(cuts[:-1], cuts[1:]))


class EquilibriumStatus(enum.Enum):
    CONVERGED = "converged"
    COLLAPSED = "collapsed"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class EquilibriumResult:
    quantizer: Quantizer
    decoder_cost: float
    encoder_cost: float
    iterations: int
    residual: float
    status: EquilibriumStatus

    @property
    def converged(self) -> bool:
        return self.status is EquilibriumStatus.CONVERGED


@dataclass(frozen=True)
class UniquenessReport:
    distinct_fixed_points: int
    max_pairwise_distance: float
    trials: int
    converged_runs: int
    collapsed_runs: int


def _mean(d: SourceDistribution, a: float, b: float) -> float:
    """Conditional mean on (a, b); NaN when the mass vanishes."""
    ka = d.kernel_args()
    if ka is not None:
        return _kernels.truncated_mean(*ka, a, b)
    try:
        m, mass = d._trunc_mean_mass(*d.support.clip(a, b))
    except (ValueError, ZeroMassInterval):
        return math.nan
    if mass < d._mass_floor:
        return math.nan
    return m


def decoder_best_response(d: SourceDistribution,
                          edges: Sequence[float]) -> tuple[float, ...]:
    """Centroid of every bin of the partition cut at ``edges``."""
    _validate_edges(d.support, edges)
    lo, hi = d.support.lower, d.support.upper
    cuts = [lo, *edges, hi]
    cents = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = _mean(d, a, b)
        if not math.isfinite(m):
            raise BinCollapse(f"bin ({a}, {b}) carries no usable mass")
        cents.append(m)
    return tuple(cents)


def encoder_best_response(centroids: Sequence[float],
                          bias: float) -> tuple[float, ...]:
    """Indifference edges: midpoints of adjacent actions shifted by the bias."""
    for u, v in zip(centroids, centroids[1:]):
        if not u < v:
            raise ValueError("centroids must be strictly increasing")
    return tuple(0.5 * (u + v) + bias
                 for u, v in zip(centroids, centroids[1:]))


def quantizer_from_edges(d: SourceDistribution,
                         edges: Sequence[float]) -> Quantizer:
    """Partition at ``edges`` with decoder-optimal centroids."""
    return Quantizer(edges=tuple(float(e) for e in edges),
                     centroids=decoder_best_response(d, edges),
                     support=d.support)


def lloyd_max_step(d: SourceDistribution, q: Quantizer,
                   bias: float) -> Quantizer:
    """One composed best-response sweep (decoder then encoder).

    Raises :class:`BinCollapse` when an output edge exits the support or two
    edges approach within ``MERGE_TOL``.
    """
    cents = decoder_best_response(d, q.edges)
    new_edges = encoder_best_response(cents, bias)
    _check_step_edges(d.support, new_edges)
    return quantizer_from_edges(d, new_edges)


def _validate_edges(support: SupportSpec, edges: Sequence[float]) -> None:
    prev = support.lower
    for m in edges:
        if not prev < m < support.upper:
            raise ValueError(f"edges must be strictly increasing inside "
                             f"({support.lower}, {support.upper})")
        prev = m


def _check_step_edges(support: SupportSpec, edges: Sequence[float]) -> None:
    lo, hi = support.lower, support.upper
    prev = None
    for m in edges:
        if math.isnan(m) or not lo < m < hi:
            raise BinCollapse(f"edge {m} left the support ({lo}, {hi})")
        if prev is not None and m - prev < MERGE_TOL:
            raise BinCollapse(f"edges {prev} and {m} merged")
        prev = m


def _default_init(d: SourceDistribution, bins: int) -> list[float]:
    # deterministic start: edges at the k/N source quantiles
    return [d.quantile(k / bins) for k in range(1, bins)]


def babbling_equilibrium(d: SourceDistribution,
                         bias: float = 0.0) -> EquilibriumResult:
    """The single-bin (non-informative) equilibrium; always exists."""
    q = Quantizer(edges=(), centroids=(d.mean(),), support=d.support)
    jd = d.variance()
    return EquilibriumResult(quantizer=q, decoder_cost=jd,
                             encoder_cost=jd + bias * bias, iterations=0,
                             residual=0.0, status=EquilibriumStatus.CONVERGED)


def _finish(d: SourceDistribution, edges: Sequence[float], bias: float,
            iterations: int, residual: float,
            status: EquilibriumStatus) -> EquilibriumResult:
    from .costs import decoder_cost as _decoder_cost  # local: avoids cycle
    from .errors import QuantEqError

    q = quantizer_from_edges(d, edges) if len(edges) else Quantizer(
        edges=(), centroids=(d.mean(),), support=d.support)
    try:
        jd = _decoder_cost(d, q).decoder_cost
    except QuantEqError:
        if status is EquilibriumStatus.CONVERGED:
            raise
        jd = math.nan
    return EquilibriumResult(quantizer=q, decoder_cost=jd,
                             encoder_cost=jd + bias * bias,
                             iterations=iterations, residual=residual,
                             status=status)


def _repair_collapsed(support: SupportSpec,
                      edges: Sequence[float]) -> list[float]:
    lo, hi = support.lower, support.upper
    kept: list[float] = []
    for m in sorted(e for e in edges if not math.isnan(e)):
        if not lo < m < hi:
            continue
        if kept and m - kept[-1] < MERGE_TOL:
            continue
        kept.append(m)
    return kept


def solve_lloyd_max(d: SourceDistribution, cfg: GameConfig,
                    init: Sequence[float] | None = None,
                    reduce_on_collapse: bool = False) -> EquilibriumResult:
    """Iterate best responses from ``init`` (default: quantile edges).

    Stops at sup-norm step ``cfg.edge_tolerance``. A collapsing step ends the
    run with status ``COLLAPSED`` unless ``reduce_on_collapse`` is set, in
    which case the offending edges are dropped and the iteration continues
    with fewer bins.
    """
    if cfg.bins == 1:
        return babbling_equilibrium(d, cfg.bias)
    edges = list(init) if init is not None else _default_init(d, cfg.bins)
    if len(edges) != cfg.bins - 1:
        raise ValueError(f"init must supply {cfg.bins - 1} edges")
    _validate_edges(d.support, edges)

    ka = d.kernel_args()
    if ka is not None and not reduce_on_collapse:
        arr = np.asarray(edges, dtype=np.float64)
        out, its, residual, code = _kernels.lloyd_solve(
            *ka, arr, cfg.bias, cfg.edge_tolerance, cfg.max_iterations,
            MERGE_TOL)
        status = {
            _kernels.STATUS_CONVERGED: EquilibriumStatus.CONVERGED,
            _kernels.STATUS_COLLAPSED: EquilibriumStatus.COLLAPSED,
            _kernels.STATUS_MAX_ITERATIONS: EquilibriumStatus.MAX_ITERATIONS,
        }[code]
        return _finish(d, [float(x) for x in out], cfg.bias, its, residual,
                       status)

    residual = math.inf
    for it in range(1, cfg.max_iterations + 1):
        cents: list[float] = []
        cuts = [d.support.lower, *edges, d.support.upper]
        dead_bin = -1
        for i, (a, b) in enumerate(zip(cuts[:-1], cuts[1:])):
            m = _mean(d, a, b)
            if not math.isfinite(m):
                dead_bin = i
                break
            cents.append(m)
        if dead_bin >= 0:
            if not reduce_on_collapse:
                return _finish(d, edges, cfg.bias, it, residual,
                               EquilibriumStatus.COLLAPSED)
            # merge the empty bin with a neighbor and keep iterating
            drop = dead_bin if dead_bin < len(edges) else len(edges) - 1
            edges = edges[:drop] + edges[drop + 1:]
            if not edges:
                return babbling_equilibrium(d, cfg.bias)
            residual = math.inf
            continue
        new = [0.5 * (u + v) + cfg.bias for u, v in zip(cents, cents[1:])]
        try:
            _check_step_edges(d.support, new)
        except BinCollapse:
            if not reduce_on_collapse:
                return _finish(d, edges, cfg.bias, it, residual,
                               EquilibriumStatus.COLLAPSED)
            repaired = _repair_collapsed(d.support, new)
            if len(repaired) == len(edges):
                repaired = repaired[:-1]
            if not repaired:
                return babbling_equilibrium(d, cfg.bias)
            edges = repaired
            residual = math.inf
            continue
        residual = max((abs(n - o) for n, o in zip(new, edges)), default=0.0)
        edges = new
        if residual <= cfg.edge_tolerance:
            return _finish(d, edges, cfg.bias, it, residual,
                           EquilibriumStatus.CONVERGED)
    return _finish(d, edges, cfg.bias, cfg.max_iterations, residual,
                   EquilibriumStatus.MAX_ITERATIONS)


# ---------------------------------------------------------------------------
# forward-shooting construction


class _Truncated(Exception):
    """Trial chain ran out of admissible inversions before reaching N bins."""


def _invert_upper(mean: Callable[[float, float], float], m: float,
                  target: float, hi: float) -> float:
    """t > m with conditional mean of (m, t) equal to ``target``.

    The conditional mean increases from m (t -> m+) to the tail mean
    (t -> hi); raises :class:`_Truncated` when the target is unreachable.
    """
    if not target > m:
        raise PropagationFailure(
            f"inversion target {target} not above the bin's lower edge {m}")
    limit = mean(m, hi)
    if math.isnan(limit) or target >= limit:
        raise _Truncated
    w = max(target - m, 1e-12 * max(1.0, abs(m)))
    t = m + w
    for _ in range(300):
        if t >= hi:
            t = hi
            break
        v = mean(m, t)
        if v >= target:
            break
        w *= 2.0
        t = m + w
    else:
        raise _Truncated
    lo_t, hi_t = m, min(t, hi)
    for _ in range(200):
        mid = 0.5 * (lo_t + hi_t)
        if mid <= lo_t or mid >= hi_t:
            break
        if mean(m, mid) < target:
            lo_t = mid
        else:
            hi_t = mid
        if hi_t - lo_t <= 1e-14 * max(1.0, abs(hi_t)):
            break
    return 0.5 * (lo_t + hi_t)


def _invert_lower(mean: Callable[[float, float], float], m: float,
                  target: float, lo: float) -> float:
    """t < m with conditional mean of (t, m) equal to ``target`` (descending)."""
    if not target < m:
        raise PropagationFailure(
            f"inversion target {target} not below the bin's upper edge {m}")
    limit = mean(lo, m)
    if math.isnan(limit) or target <= limit:
        raise _Truncated
    w = max(m - target, 1e-12 * max(1.0, abs(m)))
    t = m - w
    for _ in range(300):
        if t <= lo:
            t = lo
            break
        v = mean(t, m)
        if v <= target:
            break
        w *= 2.0
        t = m - w
    else:
        raise _Truncated
    lo_t, hi_t = max(t, lo), m
    for _ in range(200):
        mid = 0.5 * (lo_t + hi_t)
        if mid <= lo_t or mid >= hi_t:
            break
        if mean(mid, m) < target:
            lo_t = mid
        else:
            hi_t = mid
        if hi_t - lo_t <= 1e-14 * max(1.0, abs(hi_t)):
            break
    return 0.5 * (lo_t + hi_t)


def _chain(d: SourceDistribution, x: float, bins: int, bias: float,
           descending: bool) -> tuple[list[float], float, float]:
    """Propagate the indifference recursion from trial edge ``x``.

    Returns (edges in propagation order, utilde_N, ubar_N). The residual at
    the last bin is utilde_N - ubar_N.
    """
    lo, hi = d.support.lower, d.support.upper
    mean = lambda a, b: _mean(d, a, b)
    if descending:
        u = mean(x, hi)
    else:
        u = mean(lo, x)
    if math.isnan(u):
        raise _Truncated
    edges = [x]
    m = x
    for _ in range(bins - 2):
        target = 2.0 * m - u - 2.0 * bias
        if descending:
            t = _invert_lower(mean, m, target, lo)
        else:
            t = _invert_upper(mean, m, target, hi)
        edges.append(t)
        m, u = t, target
    utilde = 2.0 * m - u - 2.0 * bias
    ubar = mean(lo, m) if descending else mean(m, hi)
    return edges, utilde, ubar


def _shoot_residual(d: SourceDistribution, x: float, bins: int, bias: float,
                    descending: bool) -> float:
    """utilde - ubar at the last bin; +-inf encodes a truncated chain.

    Monotone increasing in ``x`` for both constructions; a truncated chain
    lies on the ascending high side (+inf) or the descending low side
    (-inf).
    """
    try:
        _, utilde, ubar = _chain(d, x, bins, bias, descending)
    except _Truncated:
        return math.inf if not descending else -math.inf
    return utilde - ubar


def _bracket_scale(d: SourceDistribution) -> float:
    return max(d.quantile(0.9) - d.quantile(0.1), 1e-6)


def solve_shooting(d: SourceDistribution, cfg: GameConfig) -> EquilibriumResult:
    """Find the N-bin equilibrium by shooting on the first bin edge.

    Ascending construction for ``bias <= 0`` (trial edge is the leftmost),
    descending for ``bias > 0`` (trial edge is the rightmost). The last-bin
    centroid mismatch is strictly monotone in the trial edge, so a sign
    change brackets the unique root; no sign change over the admissible
    bracket means no N-bin equilibrium exists.
    """
    if cfg.bins == 1:
        return babbling_equilibrium(d, cfg.bias)
    descending = cfg.bias > 0
    support = d.support
    span = _bracket_scale(d)
    x_lo = d.quantile(1e-12)
    x_hi = d.quantile(1.0 - 1e-12)
    if not support.bounded_below and not descending:
        x_lo = d.quantile(1e-10)
    if not support.bounded_above and descending:
        x_hi = d.quantile(1.0 - 1e-10)

    res = lambda x: _shoot_residual(d, x, cfg.bins, cfg.bias, descending)

    r_lo = res(x_lo)
    r_hi = res(x_hi)
    # the residual is increasing: grow the bracket toward the sign we lack
    grows = 0
    while r_lo > 0 and not support.bounded_below and grows < 60:
        x_lo -= span
        span *= 1.5
        r_lo = res(x_lo)
        grows += 1
    grows = 0
    span = _bracket_scale(d)
    while r_hi < 0 and not support.bounded_above and grows < 60:
        x_hi += span
        span *= 1.5
        r_hi = res(x_hi)
        grows += 1
    if not (r_lo < 0 < r_hi):
        if r_lo == 0 or r_hi == 0:
            root = x_lo if r_lo == 0 else x_hi
        else:
            raise NoEquilibrium(
                f"no {cfg.bins}-bin equilibrium: last-bin residual keeps the "
                f"same sign over [{x_lo}, {x_hi}] "
                f"(residuals {r_lo:.3g}, {r_hi:.3g})")
    else:
        root = None
    iterations = 0
    if root is None:
        lo_x, hi_x = x_lo, x_hi
        for _ in range(200):
            mid = 0.5 * (lo_x + hi_x)
            if mid <= lo_x or mid >= hi_x:
                break
            iterations += 1
            if res(mid) < 0:
                lo_x = mid
            else:
                hi_x = mid
            if hi_x - lo_x <= 1e-14 * max(1.0, abs(mid)):
                break
        root = 0.5 * (lo_x + hi_x)
    edges, utilde, ubar = _chain(d, root, cfg.bins, cfg.bias, descending)
    if descending:
        edges = sorted(edges)
    return _finish(d, edges, cfg.bias, iterations, abs(utilde - ubar),
                   EquilibriumStatus.CONVERGED)


def fixed_point_residuals(d: SourceDistribution, q: Quantizer,
                          bias: float) -> tuple[float, float]:
    """(nearest-neighbor, centroid) sup-norm residuals of a quantizer.

    Both vanish exactly at an equilibrium.
    """
    cents = decoder_best_response(d, q.edges)
    nn = 0.0
    for m, u, v in zip(q.edges, q.centroids, q.centroids[1:]):
        nn = max(nn, abs(m - 0.5 * (u + v) - bias))
    cent = max((abs(a - b) for a, b in zip(cents, q.centroids)), default=0.0)
    return nn, cent


def uniqueness_probe(d: SourceDistribution, cfg: GameConfig, trials: int,
                     seed: int) -> UniquenessReport:
    """Run the Lloyd-Max solver from ``trials`` random starts and cluster the
    converged edge vectors at sup-norm radius 1e-6."""
    rng = np.random.default_rng(seed)
    k = cfg.bins - 1
    solutions: list[np.ndarray] = []
    collapsed = 0
    converged = 0
    for _ in range(trials):
        for _attempt in range(100):
            ps = np.sort(rng.uniform(0.001, 0.999, size=k))
            edges = [d.quantile(float(p)) for p in ps]
            if all(b - a > 10 * MERGE_TOL
                   for a, b in zip(edges, edges[1:])):
                break
        result = solve_lloyd_max(d, cfg, init=edges)
        if result.status is EquilibriumStatus.CONVERGED:
            converged += 1
            solutions.append(np.asarray(result.quantizer.edges))
        else:
            collapsed += 1
    clusters: list[np.ndarray] = []
    for sol in solutions:
        for rep in clusters:
            if len(rep) == len(sol) and np.max(np.abs(rep - sol)) <= 1e-6:
                break
        else:
            clusters.append(sol)
    max_dist = 0.0
    for i in range(len(solutions)):
        for j in range(i + 1, len(solutions)):
            if len(solutions[i]) == len(solutions[j]):
                max_dist = max(max_dist, float(np.max(np.abs(
                    solutions[i] - solutions[j]))))
    return UniquenessReport(distinct_fixed_points=len(clusters),
                            max_pairwise_distance=max_dist,
                            trials=trials, converged_runs=converged,
                            collapsed_runs=collapsed)
