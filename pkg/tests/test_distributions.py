import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quanteq import (CustomDensity, Exponential, Gaussian, NonPositiveDensity,
                     SupportSpec, Uniform, ZeroMassInterval, cdf,
                     log_concavity_check, pdf, truncated_moment)
from quanteq._quad import adaptive_simpson
from quanteq.distributions import custom_from_config, quadrature_truncated_moment

# closed-form anchors, computed once with a 40-digit independent evaluation
EXP_MEAN_0_1 = 0.4180232931306736      # 1 - 1/(e-1)
HALF_NORMAL_MEAN = 0.7978845608028654  # sqrt(2/pi)
EXP_VAR_LEN1 = 0.07932640579220768


def test_pdf_values(expo, gauss, uni):
    assert pdf(expo, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert pdf(expo, -0.5) == 0.0
    assert pdf(gauss, 0.0) == pytest.approx(0.3989422804014327, abs=1e-15)
    assert pdf(uni, 2.0) == 0.0
    assert pdf(uni, 0.5) == 1.0


def test_cdf_values(expo, gauss, uni):
    assert cdf(gauss, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert cdf(expo, 50.0) == pytest.approx(1.0, abs=1e-12)
    assert cdf(uni, 0.25) == pytest.approx(0.25, abs=1e-15)
    assert cdf(uni, -1.0) == 0.0 and cdf(uni, 2.0) == 1.0


@given(st.floats(-30, 30), st.floats(-30, 30))
@settings(max_examples=100, deadline=None)
def test_cdf_monotone_gauss(x1, x2):
    g = Gaussian(0.0, 1.0)
    lo, hi = min(x1, x2), max(x1, x2)
    assert g.cdf(lo) <= g.cdf(hi)


def test_truncated_moment_values(expo, gauss):
    assert truncated_moment(expo, 0, math.inf).mean == pytest.approx(1.0, abs=1e-14)
    assert truncated_moment(expo, 0, 1).mean == pytest.approx(EXP_MEAN_0_1, abs=1e-13)
    assert truncated_moment(expo, 0, 1).variance == pytest.approx(EXP_VAR_LEN1, abs=1e-11)
    assert truncated_moment(gauss, 0, math.inf).mean == pytest.approx(
        HALF_NORMAL_MEAN, abs=1e-13)


def test_uniform_truncation_clips(uni):
    tm = truncated_moment(uni, 0.25, 2.0)
    assert tm.mean == 0.625
    assert tm.mass == pytest.approx(0.75, abs=1e-15)
    assert tm.variance == pytest.approx(0.75**2 / 12, abs=1e-15)


def test_zero_mass_interval(expo, uni, logistic):
    with pytest.raises(ZeroMassInterval):
        truncated_moment(uni, 2.0, 3.0)
    with pytest.raises(ZeroMassInterval):
        truncated_moment(expo, 800.0, 900.0)
    with pytest.raises(ZeroMassInterval):
        truncated_moment(logistic, 60.0, 61.0)
    with pytest.raises(ValueError):
        truncated_moment(expo, 1.0, 1.0)


def test_far_tail_gaussian_moments_are_stable(gauss):
    # masses far below the generic quadrature floor stay usable in closed form
    tm = truncated_moment(gauss, 12.0, 12.6)
    assert 0 < tm.mass < 1e-30
    assert 12.0 < tm.mean < 12.2
    assert 0 < tm.variance < 0.01


@pytest.mark.parametrize("seed", [1, 2])
def test_closed_forms_match_quadrature(expo, gauss, seed):
    rng = np.random.default_rng(seed)
    for d in (expo, gauss):
        for _ in range(50):
            a, b = np.sort(rng.uniform(d.quantile(0.001), d.quantile(0.999),
                                       size=2))
            if b - a < 1e-3:
                continue
            closed = d.truncated_moment(a, b)
            quad = quadrature_truncated_moment(d, a, b)
            assert closed.mean == pytest.approx(quad.mean, abs=1e-9)
            assert closed.variance == pytest.approx(quad.variance, abs=1e-9)
            assert closed.mass == pytest.approx(quad.mass, abs=1e-9)


def test_second_moment_identity(expo):
    # Var + (mean - a)^2 must equal the quadrature second moment about a
    rng = np.random.default_rng(7)
    for _ in range(30):
        a, b = np.sort(rng.uniform(0.0, 5.0, size=2))
        if b - a < 1e-2:
            continue
        tm = expo.truncated_moment(a, b)
        second = adaptive_simpson(
            lambda x: (x - a) ** 2 * expo.pdf(x), a, b) / tm.mass
        assert tm.variance + (tm.mean - a) ** 2 == pytest.approx(second, abs=1e-9)


def test_cdf_matches_pdf_integral(expo, gauss, uni, logistic):
    pairs = [(0.2, 1.7), (0.05, 0.6)]
    for d in (expo, gauss, uni, logistic):
        for x1, x2 in pairs:
            integral = adaptive_simpson(d.pdf, x1, x2)
            assert d.cdf(x2) - d.cdf(x1) == pytest.approx(integral, abs=1e-9)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
@settings(max_examples=60, deadline=None)
def test_truncated_mean_strictly_inside(p1, p2):
    d = Gaussian(0.3, 1.7)
    a, b = sorted((d.quantile(p1), d.quantile(p2)))
    if b - a < 1e-6:
        return
    tm = d.truncated_moment(a, b)
    assert a < tm.mean < b
    assert 0 < tm.mass <= 1
    assert tm.variance >= 0


def test_quantile_roundtrip(expo, gauss, uni, logistic):
    for d in (expo, gauss, uni, logistic):
        for p in (0.01, 0.3, 0.5, 0.9, 0.999):
            assert d.cdf(d.quantile(p)) == pytest.approx(p, abs=1e-9)


def test_support_spec_validation():
    with pytest.raises(ValueError):
        SupportSpec(1.0, 1.0)
    s = SupportSpec(-math.inf, 0.0)
    assert not s.bounded_below and s.bounded_above


def test_distribution_param_validation():
    with pytest.raises(ValueError):
        Exponential(0.0)
    with pytest.raises(ValueError):
        Gaussian(0.0, -1.0)
    with pytest.raises(ValueError):
        Uniform(1.0, 0.0)


def test_log_concavity(expo, gauss, uni, logistic):
    for d in (expo, gauss, uni, logistic):
        report = log_concavity_check(d, grid_size=256)
        assert report.is_log_concave, d.kind


def test_log_concavity_rejects_convex():
    d = CustomDensity(lambda x: math.exp(x * x), SupportSpec(-1.0, 1.0))
    report = log_concavity_check(d, grid_size=128)
    assert not report.is_log_concave
    assert report.worst_violation == pytest.approx(2.0, rel=0.05)


def test_custom_density_normalises():
    d = CustomDensity(lambda x: 5.0, SupportSpec(0.0, 2.0), name="flat")
    assert d.pdf(1.0) == pytest.approx(0.5, abs=1e-12)
    assert d.mean() == pytest.approx(1.0, abs=1e-10)
    assert d.variance() == pytest.approx(4.0 / 12.0, abs=1e-10)
    tm = d.truncated_moment(0.0, 1.0)
    assert tm.mean == pytest.approx(0.5, abs=1e-10)


def test_logistic_matches_theory(logistic):
    # Var = pi^2 / 3 for the unit logistic
    assert logistic.mean() == pytest.approx(0.0, abs=1e-9)
    assert logistic.variance() == pytest.approx(math.pi**2 / 3.0, rel=1e-7)
    assert logistic.cdf(0.0) == pytest.approx(0.5, abs=1e-9)


def test_custom_from_config_table():
    xs = list(np.linspace(0.0, 1.0, 21))
    ys = [2.0 * (1.0 + 0.2 * x) for x in xs]  # arbitrary scale: renormalised
    d = custom_from_config({
        "version": 1, "name": "tilted", "support": [0.0, 1.0],
        "density": {"type": "table", "x": xs, "pdf": ys},
    })
    total = adaptive_simpson(d.pdf, 0.0, 1.0)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert d.pdf(0.9) > d.pdf(0.1)


def test_custom_from_config_polynomial():
    d = custom_from_config({
        "version": 1, "support": [0.0, 2.0],
        "density": {"type": "piecewise_polynomial",
                    "breakpoints": [0.0, 1.0, 2.0],
                    "coefficients": [[0.1, 0.9], [1.0, -0.9]]},
    })
    assert d.pdf(0.5) == pytest.approx(d.pdf(1.5), rel=1e-9)
    assert adaptive_simpson(d.pdf, 0.0, 2.0) == pytest.approx(1.0, abs=1e-9)


def test_custom_from_config_rejects_bad_input():
    with pytest.raises(ValueError):
        custom_from_config({"version": 2, "support": [0, 1],
                            "density": {"type": "table", "x": [], "pdf": []}})
    with pytest.raises(NonPositiveDensity):
        custom_from_config({
            "version": 1, "support": [0.0, 1.0],
            "density": {"type": "table",
                        "x": [0.0, 0.25, 0.5, 0.75, 1.0],
                        "pdf": [1.0, -0.5, 1.0, 1.0, 1.0]},
        })
