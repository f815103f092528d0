"""Pure-Python solver kernel.

Reference implementation of the hot fixed-point loop. The Cython module
``_core`` mirrors these functions operation-for-operation; keep the two in
sync (the benchmark and ``tests/test_kernels.py`` compare them).

Distribution encoding shared with the compiled kernel:

    kind 0: exponential(rate=p0), support [0, inf)
    kind 1: gaussian(mu=p0, sigma=p1)
    kind 2: uniform(lower=p0, upper=p1)

Status codes returned by ``lloyd_solve``: 0 converged, 1 collapsed,
2 max-iterations.
"""

from __future__ import annotations

import math

import numpy as np

KIND_EXPONENTIAL = 0
KIND_GAUSSIAN = 1
KIND_UNIFORM = 2

STATUS_CONVERGED = 0
STATUS_COLLAPSED = 1
STATUS_MAX_ITERATIONS = 2

_INV_SQRT_2PI = 0.3989422804014326779
_INV_SQRT_2 = 0.7071067811865475244


def _norm_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _norm_sf(x: float) -> float:
    # upper tail, full relative precision far out
    return 0.5 * math.erfc(x * _INV_SQRT_2)


def _gauss_mass_std(alpha: float, beta: float) -> float:
    """P(alpha < Z < beta) for standard Z, stable in either tail."""
    if alpha >= 0.0:
        return _norm_sf(alpha) - _norm_sf(beta)
    if beta <= 0.0:
        return _norm_sf(-beta) - _norm_sf(-alpha)
    # straddles zero: erf terms have opposite signs, so no cancellation
    return 0.5 * (math.erf(beta * _INV_SQRT_2) - math.erf(alpha * _INV_SQRT_2))


def truncated_mean(kind: int, p0: float, p1: float, a: float, b: float) -> float:
    """E[M | a < M < b]; NaN when the interval carries no representable mass."""
    if kind == KIND_EXPONENTIAL:
        lam = p0
        lo = a if a > 0.0 else 0.0
        if b <= lo:
            return math.nan
        if math.isinf(b):
            return lo + 1.0 / lam
        w = b - lo
        return lo + 1.0 / lam - w / math.expm1(lam * w)
    if kind == KIND_GAUSSIAN:
        mu, sigma = p0, p1
        alpha = -math.inf if math.isinf(a) and a < 0 else (a - mu) / sigma
        beta = math.inf if math.isinf(b) and b > 0 else (b - mu) / sigma
        if math.isinf(alpha) and math.isinf(beta):
            return mu
        mass = _gauss_mass_std(alpha, beta)
        if mass <= 0.0 or not math.isfinite(mass):
            return math.nan
        pa = 0.0 if math.isinf(alpha) else _norm_pdf(alpha)
        pb = 0.0 if math.isinf(beta) else _norm_pdf(beta)
        return mu + sigma * (pa - pb) / mass
    if kind == KIND_UNIFORM:
        lo = a if a > p0 else p0
        hi = b if b < p1 else p1
        if hi <= lo:
            return math.nan
        return 0.5 * (lo + hi)
    raise ValueError(f"unknown kind {kind}")


def bin_mass(kind: int, p0: float, p1: float, a: float, b: float) -> float:
    """P(a < M < b), stable in the far tails."""
    if kind == KIND_EXPONENTIAL:
        lam = p0
        lo = a if a > 0.0 else 0.0
        if b <= lo:
            return 0.0
        if math.isinf(b):
            return math.exp(-lam * lo)
        return -math.exp(-lam * lo) * math.expm1(-lam * (b - lo))
    if kind == KIND_GAUSSIAN:
        mu, sigma = p0, p1
        alpha = -math.inf if math.isinf(a) and a < 0 else (a - mu) / sigma
        beta = math.inf if math.isinf(b) and b > 0 else (b - mu) / sigma
        if math.isinf(alpha) and math.isinf(beta):
            return 1.0
        if math.isinf(alpha):
            return _norm_sf(-beta)
        if math.isinf(beta):
            return _norm_sf(alpha)
        m = _gauss_mass_std(alpha, beta)
        return m if m > 0.0 else 0.0
    if kind == KIND_UNIFORM:
        lo = a if a > p0 else p0
        hi = b if b < p1 else p1
        if hi <= lo:
            return 0.0
        return (hi - lo) / (p1 - p0)
    raise ValueError(f"unknown kind {kind}")


def _support(kind: int, p0: float, p1: float) -> tuple[float, float]:
    if kind == KIND_EXPONENTIAL:
        return 0.0, math.inf
    if kind == KIND_GAUSSIAN:
        return -math.inf, math.inf
    return p0, p1


def lloyd_step(kind: int, p0: float, p1: float, edges: np.ndarray,
               bias: float, merge_tol: float = 1e-9):
    """One decoder-then-encoder best-response sweep.

    Returns ``(new_edges, ok)``; ``ok`` is False when an output edge exits
    the open support, two edges come within ``merge_tol``, or a bin mass
    vanished (NaN centroid).
    """
    lo, hi = _support(kind, p0, p1)
    k = len(edges)
    cents = [0.0] * (k + 1)
    prev = lo
    ok = True
    for i in range(k):
        cents[i] = truncated_mean(kind, p0, p1, prev, edges[i])
        prev = edges[i]
    cents[k] = truncated_mean(kind, p0, p1, prev, hi)
    out = np.empty(k, dtype=np.float64)
    last = lo
    for i in range(k):
        m = 0.5 * (cents[i] + cents[i + 1]) + bias
        out[i] = m
        if not (m > last + (merge_tol if i > 0 else 0.0)) or not m < hi:
            ok = False
        if math.isnan(m):
            ok = False
        last = m
    return out, ok


def lloyd_solve(kind: int, p0: float, p1: float, edges0: np.ndarray,
                bias: float, tol: float, max_iter: int,
                merge_tol: float = 1e-9):
    """Iterate ``lloyd_step`` to a sup-norm fixed point.

    Returns ``(edges, iterations, residual, status)``. On collapse the last
    valid edge vector is returned.
    """
    edges = np.asarray(edges0, dtype=np.float64).copy()
    if len(edges) == 0:
        return edges, 0, 0.0, STATUS_CONVERGED
    residual = math.inf
    for it in range(1, max_iter + 1):
        new, ok = lloyd_step(kind, p0, p1, edges, bias, merge_tol)
        if not ok:
            return edges, it, residual, STATUS_COLLAPSED
        residual = float(np.max(np.abs(new - edges))) if len(edges) else 0.0
        edges = new
        if residual <= tol:
            return edges, it, residual, STATUS_CONVERGED
    return edges, max_iter, residual, STATUS_MAX_ITERATIONS
