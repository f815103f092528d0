"""Equilibrium cost evaluation and the informativeness ordering.

The decoder cost of a partition is the mass-weighted sum of within-bin
conditional variances. At any equilibrium the encoder cost exceeds it by
exactly the squared bias, so the encoder column is derived from that
identity; ``encoder_cost_by_integration`` recomputes it directly for
validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ._quad import adaptive_simpson
from .distributions import SourceDistribution
from .equilibrium import (EquilibriumResult, EquilibriumStatus, GameConfig,
                          Quantizer, babbling_equilibrium, solve_lloyd_max,
                          solve_shooting)
from .errors import BinCollapse, NoEquilibrium, QuantEqError, ZeroMassInterval

__all__ = [
    "BinCost",
    "CostReport",
    "decoder_cost",
    "encoder_cost_by_integration",
    "informativeness_table",
]


@dataclass(frozen=True)
class BinCost:
    mass: float
    conditional_variance: float


@dataclass(frozen=True)
class CostReport:
    bins: int
    decoder_cost: float
    encoder_cost: float
    per_bin: tuple[BinCost, ...]


def decoder_cost(d: SourceDistribution, q: Quantizer,
                 bias: float = 0.0) -> CostReport:
    """Mass-weighted conditional variance of every bin of ``q``."""
    per_bin = []
    total = 0.0
    for a, b in q.bin_bounds():
        try:
            tm = d.truncated_moment(a, b)
        except ZeroMassInterval as exc:
            raise BinCollapse(f"bin ({a}, {b}) has vanishing mass") from exc
        per_bin.append(BinCost(mass=tm.mass,
                               conditional_variance=tm.variance))
        total += tm.mass * tm.variance
    return CostReport(bins=q.bins, decoder_cost=total,
                      encoder_cost=total + bias * bias,
                      per_bin=tuple(per_bin))


def encoder_cost_by_integration(d: SourceDistribution, q: Quantizer,
                                bias: float) -> float:
    """Direct quadrature of (m - u_k - b)^2 over each bin.

    Validation route for the ``J^e = J^d + b^2`` identity; the identity is
    exact, the integral is not, so prefer :func:`decoder_cost` in production.
    """
    wlo, whi = d._quadrature_window()
    total = 0.0
    for (a, b), u in zip(q.bin_bounds(), q.centroids):
        a, b = max(a, wlo), min(b, whi)
        if b <= a:
            continue
        total += adaptive_simpson(
            lambda x: (x - u - bias) ** 2 * d.pdf(x), a, b)
    return total


def _solve_auto(d: SourceDistribution, cfg: GameConfig,
                method: str) -> EquilibriumResult:
    if method == "lloyd":
        return solve_lloyd_max(d, cfg)
    if method == "shooting":
        return solve_shooting(d, cfg)
    if method == "auto":
        result = solve_lloyd_max(d, cfg)
        if result.status is EquilibriumStatus.CONVERGED:
            return result
        return solve_shooting(d, cfg)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class InformativenessRow:
    bins: int
    status: str
    report: CostReport | None


def informativeness_table(d: SourceDistribution, bias: float,
                          bins_range: Sequence[int],
                          method: str = "auto") -> list[InformativenessRow]:
    """Equilibrium costs across bin counts; unsolvable counts are flagged.

    Wherever equilibria exist the decoder cost is strictly decreasing in the
    bin count (more bins = more informative).
    """
    rows: list[InformativenessRow] = []
    for n in bins_range:
        if n == 1:
            res = babbling_equilibrium(d, bias)
        else:
            cfg = GameConfig(bias=bias, bins=n)
            try:
                res = _solve_auto(d, cfg, method)
            except (NoEquilibrium, QuantEqError) as exc:
                rows.append(InformativenessRow(
                    bins=n, status=type(exc).__name__, report=None))
                continue
        if res.status is not EquilibriumStatus.CONVERGED:
            rows.append(InformativenessRow(
                bins=n, status=res.status.value, report=None))
            continue
        report = decoder_cost(d, res.quantizer, bias)
        rows.append(InformativenessRow(bins=n, status="converged",
                                       report=report))
    return rows
