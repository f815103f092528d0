"""Source distributions with exact or quadrature-based truncated moments.

Closed forms cover the exponential, Gaussian and uniform families (means and
masses are delegated to the solver kernel so that the iteration and the
library evaluate identical expressions). Arbitrary log-concave densities are
supported through :class:`CustomDensity`, which integrates a user-supplied
pdf with adaptive Simpson quadrature over a clamped window.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri

from . import _kernels
from ._quad import adaptive_simpson
from .errors import DomainError, NonPositiveDensity, ZeroMassInterval

__all__ = [
    "SupportSpec",
    "TruncatedMoment",
    "SourceDistribution",
    "Exponential",
    "Gaussian",
    "Uniform",
    "CustomDensity",
    "LogConcavityReport",
    "pdf",
    "cdf",
    "truncated_moment",
    "log_concavity_check",
    "custom_from_config",
]

# Probability clipped off each infinite tail when a generic integral needs a
# finite window.
TAIL_CLIP = 1e-14

# Below this mass a quadrature-based conditional mean is numerically
# untrustworthy; closed-form families only require the mass to be a normal
# positive double.
QUADRATURE_MASS_FLOOR = 1e-13
CLOSED_FORM_MASS_FLOOR = 5e-300


@dataclass(frozen=True)
class SupportSpec:
    """Closure of the set where the density is positive; ends may be infinite."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ValueError(f"support requires lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def bounded_below(self) -> bool:
        return math.isfinite(self.lower)

    @property
    def bounded_above(self) -> bool:
        return math.isfinite(self.upper)

    @property
    def two_sided_unbounded(self) -> bool:
        return not self.bounded_below and not self.bounded_above

    def contains_interior(self, x: float) -> bool:
        return self.lower < x < self.upper

    def clip(self, a: float, b: float) -> tuple[float, float]:
        return max(a, self.lower), min(b, self.upper)


@dataclass(frozen=True)
class TruncatedMoment:
    """Conditional mean/variance of the source on an interval, plus its mass."""

    mean: float
    variance: float
    mass: float


@dataclass(frozen=True)
class LogConcavityReport:
    is_log_concave: bool
    worst_violation: float


class SourceDistribution:
    """Common interface for all source laws. Instances are immutable."""

    kind: str = "abstract"
    _mass_floor: float = QUADRATURE_MASS_FLOOR

    @property
    def support(self) -> SupportSpec:
        raise NotImplementedError

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def quantile(self, p: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def _trunc_mean_mass(self, a: float, b: float) -> tuple[float, float]:
        """Conditional mean and mass on the support-clipped interval (a, b)."""
        raise NotImplementedError

    def _trunc_variance(self, a: float, b: float, mean: float, mass: float) -> float:
        """Conditional variance; default path integrates the second central moment."""
        lo, hi = self._quadrature_window()
        a = max(a, lo)
        b = min(b, hi)
        log_mass = math.log(mass)

        def integrand(x: float) -> float:
            fx = self.pdf(x)
            if fx <= 0.0:
                return 0.0
            d = x - mean
            return d * d * math.exp(math.log(fx) - log_mass)

        var = adaptive_simpson(integrand, a, b)
        return max(var, 0.0)

    def truncated_moment(self, a: float, b: float) -> TruncatedMoment:
        """Mean, variance and mass of the source conditioned on ``a < M < b``."""
        if not a < b:
            raise ValueError(f"truncation requires a < b, got [{a}, {b}]")
        lo, hi = self.support.clip(a, b)
        if not lo < hi:
            raise ZeroMassInterval(f"interval [{a}, {b}] misses the support")
        mean, mass = self._trunc_mean_mass(lo, hi)
        if not (mass >= self._mass_floor) or not math.isfinite(mean):
            raise ZeroMassInterval(
                f"mass {mass!r} of [{a}, {b}] is below the stability floor")
        variance = self._trunc_variance(lo, hi, mean, mass)
        return TruncatedMoment(mean=mean, variance=variance, mass=min(mass, 1.0))

    def _quadrature_window(self) -> tuple[float, float]:
        """Finite interval carrying all but ~2*TAIL_CLIP of the mass."""
        s = self.support
        lo = s.lower if s.bounded_below else self.quantile(TAIL_CLIP)
        hi = s.upper if s.bounded_above else self.quantile(1.0 - TAIL_CLIP)
        return lo, hi

    def kernel_args(self) -> tuple[int, float, float] | None:
        """(kind code, p0, p1) when the solver kernel knows this family."""
        return None

    def describe(self) -> dict:
        """JSON-ready description of the distribution."""
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(SourceDistribution):
    rate: float

    kind = "exponential"
    _mass_floor = CLOSED_FORM_MASS_FLOOR

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def support(self) -> SupportSpec:
        return SupportSpec(0.0, math.inf)

    def pdf(self, x: float) -> float:
        if x < 0.0:
            return 0.0
        return self.rate * math.exp(-self.rate * x)

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return -math.expm1(-self.rate * x)

    def quantile(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if p == 1.0:
            return math.inf
        return -math.log1p(-p) / self.rate

    def mean(self) -> float:
        return 1.0 / self.rate

    def variance(self) -> float:
        return 1.0 / self.rate**2

    def _trunc_mean_mass(self, a: float, b: float) -> tuple[float, float]:
        args = (_kernels.KIND_EXPONENTIAL, self.rate, 0.0)
        return (_kernels.truncated_mean(*args, a, b), _kernels.bin_mass(*args, a, b))

    def _trunc_variance(self, a: float, b: float, mean: float, mass: float) -> float:
        if math.isinf(b):
            return 1.0 / self.rate**2
        w = b - a
        s = math.sinh(0.5 * self.rate * w)
        return 1.0 / self.rate**2 - w * w / (4.0 * s * s)

    def kernel_args(self) -> tuple[int, float, float]:
        return (_kernels.KIND_EXPONENTIAL, self.rate, 0.0)

    def describe(self) -> dict:
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class Gaussian(SourceDistribution):
    mu: float
    sigma: float

    kind = "gaussian"
    _mass_floor = CLOSED_FORM_MASS_FLOOR

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def support(self) -> SupportSpec:
        return SupportSpec(-math.inf, math.inf)

    def pdf(self, x: float) -> float:
        z = (x - self.mu) / self.sigma
        return math.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def cdf(self, x: float) -> float:
        z = (x - self.mu) / self.sigma
        return 0.5 * math.erfc(-z / math.sqrt(2.0))

    def quantile(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if p == 0.0:
            return -math.inf
        if p == 1.0:
            return math.inf
        return self.mu + self.sigma * float(ndtri(p))

    def mean(self) -> float:
        return self.mu

    def variance(self) -> float:
        return self.sigma**2

    def _trunc_mean_mass(self, a: float, b: float) -> tuple[float, float]:
        args = (_kernels.KIND_GAUSSIAN, self.mu, self.sigma)
        return (_kernels.truncated_mean(*args, a, b), _kernels.bin_mass(*args, a, b))

    def _trunc_variance(self, a: float, b: float, mean: float, mass: float) -> float:
        # The exact mean is a one-line formula; the second moment is
        # integrated instead of transcribed. Infinite ends are clamped where
        # the conditional density is already negligible.
        if math.isinf(a):
            a = min(self.mu - 40.0 * self.sigma, b - 4.0 * self.sigma)
        if math.isinf(b):
            b = max(self.mu + 40.0 * self.sigma, a + 4.0 * self.sigma)
        log_mass = math.log(mass) if mass > 0 else -math.inf
        lc = math.log(self.sigma * math.sqrt(2.0 * math.pi))

        def integrand(x: float) -> float:
            z = (x - self.mu) / self.sigma
            d = x - mean
            return d * d * math.exp(-0.5 * z * z - lc - log_mass)

        return max(adaptive_simpson(integrand, a, b), 0.0)

    def kernel_args(self) -> tuple[int, float, float]:
        return (_kernels.KIND_GAUSSIAN, self.mu, self.sigma)

    def describe(self) -> dict:
        return {"kind": self.kind, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Uniform(SourceDistribution):
    lower: float
    upper: float

    kind = "uniform"
    _mass_floor = CLOSED_FORM_MASS_FLOOR

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)
                and self.lower < self.upper):
            raise ValueError("uniform support must be a finite interval")

    @property
    def support(self) -> SupportSpec:
        return SupportSpec(self.lower, self.upper)

    def pdf(self, x: float) -> float:
        if self.lower <= x <= self.upper:
            return 1.0 / (self.upper - self.lower)
        return 0.0

    def cdf(self, x: float) -> float:
        if x <= self.lower:
            return 0.0
        if x >= self.upper:
            return 1.0
        return (x - self.lower) / (self.upper - self.lower)

    def quantile(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        return self.lower + p * (self.upper - self.lower)

    def mean(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def variance(self) -> float:
        return (self.upper - self.lower) ** 2 / 12.0

    def _trunc_mean_mass(self, a: float, b: float) -> tuple[float, float]:
        args = (_kernels.KIND_UNIFORM, self.lower, self.upper)
        return (_kernels.truncated_mean(*args, a, b), _kernels.bin_mass(*args, a, b))

    def _trunc_variance(self, a: float, b: float, mean: float, mass: float) -> float:
        return (b - a) ** 2 / 12.0

    def kernel_args(self) -> tuple[int, float, float]:
        return (_kernels.KIND_UNIFORM, self.lower, self.upper)

    def describe(self) -> dict:
        return {"kind": self.kind, "lower": self.lower, "upper": self.upper}


class _MomentTable:
    """Panelised cumulative integrals of (pdf, x*pdf) over a finite window.

    Queries combine whole cached panels with adaptive quadrature on the two
    partial end panels, so results match direct adaptive integration to the
    quadrature tolerance at a fraction of the cost.
    """

    def __init__(self, raw_pdf: Callable[[float], float], lo: float, hi: float,
                 panels: int = 768) -> None:
        self.raw_pdf = raw_pdf
        self.lo = lo
        self.hi = hi
        self.nodes = np.linspace(lo, hi, panels + 1)
        mass = np.empty(panels)
        m1 = np.empty(panels)
        for i in range(panels):
            a, b = self.nodes[i], self.nodes[i + 1]
            mass[i] = adaptive_simpson(raw_pdf, a, b, tol=2e-15)
            m1[i] = adaptive_simpson(lambda x: x * raw_pdf(x), a, b, tol=2e-15)
        self.cum_mass = np.concatenate(([0.0], np.cumsum(mass)))
        self.cum_m1 = np.concatenate(([0.0], np.cumsum(m1)))
        self.total = float(self.cum_mass[-1])

    def _partial(self, f: Callable[[float], float], a: float, b: float) -> float:
        if b <= a:
            return 0.0
        return adaptive_simpson(f, a, b, tol=1e-14)

    def _integrate(self, cum: np.ndarray, f: Callable[[float], float],
                   a: float, b: float) -> float:
        a = max(a, self.lo)
        b = min(b, self.hi)
        if b <= a:
            return 0.0
        i = bisect.bisect_right(self.nodes, a) - 1
        j = bisect.bisect_left(self.nodes, b) - 1
        i = min(max(i, 0), len(self.nodes) - 2)
        j = min(max(j, 0), len(self.nodes) - 2)
        if i == j:
            return self._partial(f, a, b)
        head = self._partial(f, a, float(self.nodes[i + 1]))
        tail = self._partial(f, float(self.nodes[j]), b)
        return head + float(cum[j] - cum[i + 1]) + tail

    def mass(self, a: float, b: float) -> float:
        return self._integrate(self.cum_mass, self.raw_pdf, a, b)

    def first_moment(self, a: float, b: float) -> float:
        return self._integrate(self.cum_m1, lambda x: x * self.raw_pdf(x), a, b)


def _find_finite_window(raw_pdf: Callable[[float], float],
                        support: SupportSpec) -> tuple[float, float]:
    """Expand outward from the finite part of the support until the pdf mass
    stops growing; heavy tails (non-integrable mean) abort."""
    lo = support.lower if support.bounded_below else -1.0
    hi = support.upper if support.bounded_above else 1.0
    if lo >= hi:
        lo, hi = hi - 1.0, lo + 1.0
    mass = adaptive_simpson(raw_pdf, lo, hi, tol=1e-13)
    for _ in range(60):
        grew = False
        span = hi - lo
        if not support.bounded_below:
            add = adaptive_simpson(raw_pdf, lo - span, lo, tol=1e-13)
            if add > 1e-16 * max(mass, 1e-300):
                lo -= span
                mass += add
                grew = True
        if not support.bounded_above:
            add = adaptive_simpson(raw_pdf, hi, hi + span, tol=1e-13)
            if add > 1e-16 * max(mass, 1e-300):
                hi += span
                mass += add
                grew = True
        if not grew:
            return lo, hi
    raise ValueError("density tail mass does not converge; is the mean finite?")


class CustomDensity(SourceDistribution):
    """User-supplied density, renormalised at construction.

    The pdf is integrated over a finite window clamped at the
    ``[q(1e-14), q(1-1e-14)]`` quantiles when the declared support is
    infinite; all conditional moments use adaptive Simpson quadrature.
    """

    kind = "custom"
    _mass_floor = QUADRATURE_MASS_FLOOR

    def __init__(self, pdf: Callable[[float], float],
                 support: SupportSpec | tuple[float, float],
                 name: str = "custom") -> None:
        if not isinstance(support, SupportSpec):
            support = SupportSpec(*support)
        self._support = support
        self.name = name
        lo, hi = _find_finite_window(pdf, support)
        table = _MomentTable(pdf, lo, hi)
        if not table.total > 0.0:
            raise NonPositiveDensity("pdf integrates to a non-positive mass")
        self._raw = pdf
        self._norm = 1.0 / table.total
        self._table = table
        # re-window at the clip quantiles for resolution, if that tightens
        qlo = self._raw_quantile(TAIL_CLIP)
        qhi = self._raw_quantile(1.0 - TAIL_CLIP)
        if qhi - qlo < 0.999 * (hi - lo):
            self._table = _MomentTable(pdf, qlo, qhi)
            self._norm = 1.0 / self._table.total
        self._mean = self._table.first_moment(self._table.lo, self._table.hi) * self._norm
        var = adaptive_simpson(
            lambda x: (x - self._mean) ** 2 * self.pdf(x),
            self._table.lo, self._table.hi)
        self._variance = max(var, 0.0)

    @property
    def support(self) -> SupportSpec:
        return self._support

    def pdf(self, x: float) -> float:
        if not self._support.lower <= x <= self._support.upper:
            return 0.0
        v = self._raw(x) * self._norm
        if v < 0.0:
            raise NonPositiveDensity(f"pdf({x}) = {v} is negative")
        return v

    def cdf(self, x: float) -> float:
        if x <= self._table.lo:
            return 0.0
        if x >= self._table.hi:
            return 1.0
        return min(self._table.mass(self._table.lo, x) * self._norm, 1.0)

    def _raw_quantile(self, p: float) -> float:
        target = p * self._table.total
        nodes = self._table.nodes
        cum = self._table.cum_mass
        j = int(np.searchsorted(cum, target))
        j = min(max(j, 1), len(nodes) - 1)
        a, b = float(nodes[j - 1]), float(nodes[j])
        fa = float(cum[j - 1]) - target
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = float(cum[j - 1]) + self._table.mass(float(nodes[j - 1]), m) - target
            if (fa <= 0.0) == (fm <= 0.0):
                a, fa = m, fm
            else:
                b = m
            if b - a <= 1e-13 * max(1.0, abs(a)):
                break
        return 0.5 * (a + b)

    def quantile(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if p == 0.0:
            return self._support.lower
        if p == 1.0:
            return self._support.upper
        return self._raw_quantile(p)

    def mean(self) -> float:
        return self._mean

    def variance(self) -> float:
        return self._variance

    def _quadrature_window(self) -> tuple[float, float]:
        return self._table.lo, self._table.hi

    def _trunc_mean_mass(self, a: float, b: float) -> tuple[float, float]:
        a = max(a, self._table.lo)
        b = min(b, self._table.hi)
        if b <= a:
            return math.nan, 0.0
        mass = self._table.mass(a, b) * self._norm
        if mass <= 0.0:
            return math.nan, 0.0
        mean = self._table.first_moment(a, b) * self._norm / mass
        return mean, mass

    def describe(self) -> dict:
        s = self._support
        return {"kind": self.kind, "name": self.name,
                "lower": s.lower, "upper": s.upper}


def pdf(d: SourceDistribution, x: float) -> float:
    """Density of the source at ``x`` (zero outside the support)."""
    return d.pdf(x)


def cdf(d: SourceDistribution, x: float) -> float:
    """P(M <= x)."""
    return d.cdf(x)


def truncated_moment(d: SourceDistribution, a: float, b: float) -> TruncatedMoment:
    """Conditional mean/variance/mass of ``d`` on the interval ``(a, b)``."""
    return d.truncated_moment(a, b)


def quadrature_truncated_moment(d: SourceDistribution, a: float, b: float) -> TruncatedMoment:
    """Generic quadrature route for any distribution.

    Independent of the closed forms; used to cross-check them.
    """
    if not a < b:
        raise ValueError(f"truncation requires a < b, got [{a}, {b}]")
    lo, hi = d.support.clip(a, b)
    wlo, whi = d._quadrature_window()
    lo, hi = max(lo, wlo), min(hi, whi)
    if not lo < hi:
        raise ZeroMassInterval(f"interval [{a}, {b}] misses the support")
    mass = adaptive_simpson(d.pdf, lo, hi)
    if mass < QUADRATURE_MASS_FLOOR:
        raise ZeroMassInterval(f"mass {mass!r} below quadrature floor")
    mean = adaptive_simpson(lambda x: x * d.pdf(x), lo, hi) / mass
    var = adaptive_simpson(lambda x: (x - mean) ** 2 * d.pdf(x), lo, hi) / mass
    return TruncatedMoment(mean=mean, variance=max(var, 0.0), mass=min(mass, 1.0))


CUSTOM_CONFIG_VERSION = 1


def custom_from_config(cfg: dict) -> CustomDensity:
    """Build a :class:`CustomDensity` from a parsed config mapping.

    Supported density descriptions (see ``schemas/custom_density.schema.json``
    and the CLI docs): a tabulated pdf, interpolated monotone-cubically, or a
    piecewise polynomial in local coordinates. Either is renormalised.
    """
    version = cfg.get("version")
    if version != CUSTOM_CONFIG_VERSION:
        raise ValueError(f"unsupported custom-density config version {version!r}")
    name = cfg.get("name", "custom")
    lo, hi = (float(v) for v in cfg["support"])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("custom-density support must be a finite interval")
    dens = cfg["density"]
    kind = dens.get("type")
    if kind == "table":
        xs = np.asarray(dens["x"], dtype=float)
        ys = np.asarray(dens["pdf"], dtype=float)
        if len(xs) != len(ys) or len(xs) < 4:
            raise ValueError("tabulated pdf needs >= 4 aligned (x, pdf) pairs")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("tabulated x grid must be strictly increasing")
        if np.any(ys < 0):
            raise NonPositiveDensity("tabulated pdf has negative entries")
        from scipy.interpolate import PchipInterpolator

        interp = PchipInterpolator(xs, ys, extrapolate=False)
        x0, x1 = float(xs[0]), float(xs[-1])

        def raw(x: float) -> float:
            if x < x0 or x > x1:
                return 0.0
            v = float(interp(x))
            return v if v > 0.0 else 0.0

        lo, hi = max(lo, x0), min(hi, x1)
    elif kind == "piecewise_polynomial":
        brk = [float(v) for v in dens["breakpoints"]]
        coef = [list(map(float, c)) for c in dens["coefficients"]]
        if len(brk) < 2 or len(coef) != len(brk) - 1:
            raise ValueError("need one coefficient row per breakpoint interval")
        if any(b1 <= b0 for b0, b1 in zip(brk, brk[1:])):
            raise ValueError("breakpoints must be strictly increasing")

        def raw(x: float) -> float:
            if x < brk[0] or x > brk[-1]:
                return 0.0
            i = min(bisect.bisect_right(brk, x) - 1, len(coef) - 1)
            t = x - brk[i]
            acc = 0.0
            for c in reversed(coef[i]):
                acc = acc * t + c
            return acc if acc > 0.0 else 0.0

        lo, hi = max(lo, brk[0]), min(hi, brk[-1])
    else:
        raise ValueError(f"unknown density type {kind!r}")
    return CustomDensity(raw, SupportSpec(lo, hi), name=str(name))


def log_concavity_check(d: SourceDistribution, grid_size: int = 512,
                        tolerance: float = 1e-7) -> LogConcavityReport:
    """Sample log f on an interior grid and test discrete concavity.

    The report is ``is_log_concave=True`` when every centred second
    difference of ``log f`` (scaled by the squared step) stays below
    ``tolerance``.
    """
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    s = d.support
    lo = s.lower if s.bounded_below else d.quantile(1e-9)
    hi = s.upper if s.bounded_above else d.quantile(1.0 - 1e-9)
    pad = 1e-9 * (hi - lo)
    xs = np.linspace(lo + pad, hi - pad, grid_size)
    logs = np.empty(grid_size)
    for i, x in enumerate(xs):
        fx = d.pdf(float(x))
        if fx <= 0.0:
            raise NonPositiveDensity(f"pdf({x}) = {fx} inside the support")
        logs[i] = math.log(fx)
    h = xs[1] - xs[0]
    second = (logs[:-2] - 2.0 * logs[1:-1] + logs[2:]) / (h * h)
    worst = float(second.max()) if len(second) else 0.0
    return LogConcavityReport(is_log_concave=worst <= tolerance,
                              worst_violation=worst)
