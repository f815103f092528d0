import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from quanteq import (DomainError, GameConfig, NoEquilibrium,
                     backward_recursion, g, h, infinite_bin_length,
                     infinite_cost, lambert_w, nmax_exponential,
                     solve_shooting, two_bin_edge)
from quanteq.equilibrium import fixed_point_residuals, quantizer_from_edges

TWO_BIN_EDGE = 1.5936242600400401    # (1/l)W0(-2e^-2) + 2, l = 1
W0_MINUS_2E2 = -0.40637573995995991
LSTAR_B01 = 1.1064692648782116
JINF_B01 = 0.09606855853003249


def test_g_h_limits_and_values():
    assert g(0.0) == pytest.approx(1.0, abs=1e-12)
    assert h(0.0) == pytest.approx(1.0, abs=1e-12)
    assert g(1e-9) == pytest.approx(1.0, abs=1e-8)
    assert g(1.0) == pytest.approx(math.e / (math.e - 1.0), abs=1e-14)
    assert g(0.5, rate=2.0) == pytest.approx(0.5 * math.e / (math.e - 1.0),
                                             abs=1e-14)
    with pytest.raises(DomainError):
        g(-0.1)


@given(st.floats(1e-8, 20.0), st.floats(0.2, 4.0))
@settings(max_examples=150, deadline=None)
def test_g_minus_h_is_identity(x, rate):
    assert g(x, rate) - h(x, rate) == pytest.approx(x, rel=1e-12, abs=1e-12)
    assert h(x, rate) < 1.0 / rate
    assert g(x, rate) > 1.0 / rate


def test_g_increasing_h_decreasing():
    xs = np.linspace(0.01, 8.0, 200)
    gs = [g(x) for x in xs]
    hs = [h(x) for x in xs]
    assert all(a < b for a, b in zip(gs, gs[1:]))
    assert all(a > b for a, b in zip(hs, hs[1:]))


def test_lambert_special_points():
    assert lambert_w("W0", 0.0) == 0.0
    assert lambert_w("W0", -math.exp(-1.0)) == -1.0
    assert lambert_w("Wm1", -math.exp(-1.0)) == -1.0
    assert lambert_w("W0", -2.0 * math.exp(-2.0)) == pytest.approx(
        W0_MINUS_2E2, abs=1e-13)
    assert lambert_w("Wm1", -2.0 * math.exp(-2.0)) == pytest.approx(-2.0,
                                                                    abs=1e-13)


def test_lambert_domain_errors():
    with pytest.raises(DomainError):
        lambert_w("W0", -0.5)
    with pytest.raises(DomainError):
        lambert_w("Wm1", 0.1)
    with pytest.raises(ValueError):
        lambert_w("W2", 0.1)


def test_lambert_residuals_both_branches():
    # 1000 domain points, residual w e^w - x within 1e-13
    xs0 = np.concatenate([
        np.linspace(-math.exp(-1.0) + 1e-12, -1e-6, 300),
        np.linspace(-1e-6, 1.0, 200),
        np.geomspace(1.0, 1e6, 100),
    ])
    for x in xs0:
        w = lambert_w("W0", float(x))
        assert abs(w * math.exp(w) - x) <= 1e-13 * max(1.0, abs(x))
        assert w >= -1.0
    xs1 = -np.geomspace(math.exp(-1.0) - 1e-12, 1e-8, 400)
    for x in xs1:
        w = lambert_w("Wm1", float(x))
        assert abs(w * math.exp(w) - x) <= 1e-13
        assert w <= -1.0


def test_lambert_matches_scipy():
    xs = np.linspace(-math.exp(-1.0) + 1e-6, 3.0, 200)
    for x in xs:
        mine = lambert_w("W0", float(x))
        ref = float(scipy.special.lambertw(float(x), 0).real)
        assert mine == pytest.approx(ref, abs=2e-12)


def test_lambert_near_branch_point():
    # reference values from a 50-digit evaluation at these exact doubles;
    # the root is ill-conditioned here (dW/dx ~ 1/sqrt(2e(x + 1/e)))
    x1 = -math.exp(-1.0) + 1e-9
    x2 = -math.exp(-1.0) + 1e-8
    assert lambert_w("W0", x1) == pytest.approx(-0.99992626875483632498,
                                                abs=5e-12)
    assert lambert_w("W0", x2) == pytest.approx(-0.99976685372198897699,
                                                abs=5e-12)


def test_two_bin_edge_values():
    assert two_bin_edge(1.0, 0.0) == pytest.approx(TWO_BIN_EDGE, abs=1e-12)
    with pytest.raises(NoEquilibrium):
        two_bin_edge(1.0, -0.5)
    with pytest.raises(NoEquilibrium):
        two_bin_edge(2.0, -0.25)
    # bracket from the W0 range: 1/l + 2b < m1 < 2/l + 2b
    for rate in (0.5, 1.0, 2.0):
        for bias in (-0.2, 0.0, 0.4):
            if bias <= -0.5 / rate:
                continue
            m1 = two_bin_edge(rate, bias)
            assert 1.0 / rate + 2 * bias < m1 < 2.0 / rate + 2 * bias


def test_two_bin_edge_matches_shooting(expo):
    res = solve_shooting(expo, GameConfig(bias=0.0, bins=2))
    assert res.quantizer.edges[0] == pytest.approx(two_bin_edge(1.0, 0.0),
                                                   abs=1e-9)


def test_backward_recursion_two_bins():
    state = backward_recursion(1.0, 0.0, 2)
    assert state.lengths[0] == pytest.approx(TWO_BIN_EDGE, abs=1e-10)
    assert state.edges == state.lengths


def test_backward_recursion_no_equilibrium():
    with pytest.raises(NoEquilibrium):
        backward_recursion(1.0, -0.21, 3)
    with pytest.raises(NoEquilibrium):
        backward_recursion(1.0, -0.5, 2)
    # true feasibility boundary at b=-0.1 sits at four bins
    backward_recursion(1.0, -0.1, 4)
    with pytest.raises(NoEquilibrium):
        backward_recursion(1.0, -0.1, 5)


@pytest.mark.parametrize("bias,bins", [(-0.1, 4), (0.0, 6), (0.1, 5)])
def test_recursion_lengths_monotone_with_small_gaps(bias, bins):
    state = backward_recursion(1.0, bias, bins)
    lengths = state.lengths
    for a, b in zip(lengths, lengths[1:]):
        assert b - a > 1e-10
        assert b - a < 1.0
    if bias > 0:
        assert all(2 * bias < l < 2.0 + 2 * bias for l in lengths)


@pytest.mark.parametrize("bias,bins", [(-0.1, 4), (0.0, 5), (0.1, 6),
                                       (0.25, 4)])
def test_recursion_edges_match_shooting(expo, bias, bins):
    state = backward_recursion(1.0, bias, bins)
    res = solve_shooting(expo, GameConfig(bias=bias, bins=bins))
    assert len(res.quantizer.edges) == len(state.edges)
    for a, b in zip(state.edges, res.quantizer.edges):
        assert a == pytest.approx(b, abs=1e-8)


def test_recursion_edges_are_equilibria(expo):
    state = backward_recursion(1.0, 0.1, 6)
    q = quantizer_from_edges(expo, state.edges)
    nn, cent = fixed_point_residuals(expo, q, 0.1)
    assert nn <= 1e-8 and cent <= 1e-8


def test_infinite_bin_length():
    lstar = infinite_bin_length(1.0, 0.1)
    assert lstar == pytest.approx(LSTAR_B01, abs=1e-10)
    c = 2.2
    assert abs((c - lstar) * math.exp(lstar) - (c + lstar)) <= 1e-12
    with pytest.raises(DomainError):
        infinite_bin_length(1.0, 0.0)
    for rate in (0.5, 1.0, 3.0):
        for bias in (0.05, 0.3, 1.0):
            l = infinite_bin_length(rate, bias)
            assert 2 * bias < l < 2.0 / rate + 2 * bias


def test_constant_lstar_is_recursion_fixed_point():
    for bias in (0.05, 0.1, 0.4):
        lstar = infinite_bin_length(1.0, bias)
        c = 2.0 + 2.0 * bias
        assert g(lstar) == pytest.approx(c - h(lstar), abs=1e-10)


def _h_inverse(target, rate=1.0):
    lo, hi = 1e-12, 1.0
    while h(hi, rate) > target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid, rate) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("offset", [0.05, -0.05])
def test_forward_recursion_diverges_off_fixed_point(offset):
    # seeding away from l* drives the forward recursion monotonically out of
    # the admissible length band in finitely many steps
    bias = 0.1
    lstar = infinite_bin_length(1.0, bias)
    c = 2.0 + 2.0 * bias
    l = lstar + offset
    seq = [l]
    for _ in range(200):
        target = c - g(seq[-1])
        if not 0.0 < target < 1.0:
            break
        seq.append(_h_inverse(target))
    else:
        pytest.fail("sequence did not exit the admissible band")
    diffs = [b - a for a, b in zip(seq, seq[1:])]
    if offset > 0:
        assert all(d > 0 for d in diffs)
    else:
        assert all(d < 0 for d in diffs)


def test_finite_lengths_dominate_lstar():
    lstar = infinite_bin_length(1.0, 0.1)
    state = backward_recursion(1.0, 0.1, 6)
    assert all(l >= lstar - 1e-12 for l in state.lengths)


def test_nmax_exponential():
    assert nmax_exponential(1.0, -0.1) == 6
    assert nmax_exponential(2.0, -0.05) == 6
    assert nmax_exponential(1.0, -0.5) == 1
    assert nmax_exponential(1.0, -0.6) == 1
    with pytest.raises(DomainError):
        nmax_exponential(1.0, 0.1)


def test_infinite_cost():
    assert infinite_cost(1.0, 0.1) == pytest.approx(JINF_B01, abs=1e-10)
    with pytest.raises(DomainError):
        infinite_cost(1.0, -0.1)
    # with a huge bias the partition stops informing: cost approaches Var = 1
    assert 0.999 < infinite_cost(1.0, 5.0) < 1.0
    assert infinite_cost(1.0, 0.1) < infinite_cost(1.0, 1.0) < infinite_cost(1.0, 5.0)
