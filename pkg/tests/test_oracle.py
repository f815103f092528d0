import pytest

from quanteq import (GameConfig, GridSearchSpec, NoEquilibrium,
                     brute_force_equilibrium, brute_force_two_bin,
                     comparison_matrix, solve_lloyd_max, solve_shooting,
                     uniform_closed_form)
from quanteq.equilibrium import fixed_point_residuals, quantizer_from_edges

TWO_BIN_EXP = 1.5936242600400401


def test_spec_validation():
    with pytest.raises(ValueError):
        GridSearchSpec(bracket=(0.0, 1.0), resolution=2)
    with pytest.raises(ValueError):
        GridSearchSpec(bracket=(1.0, 1.0))


def test_two_bin_oracle(expo, gauss):
    assert brute_force_two_bin(expo, 0.0)[0] == pytest.approx(TWO_BIN_EXP,
                                                              abs=1e-7)
    assert brute_force_two_bin(gauss, 0.0)[0] == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(NoEquilibrium):
        brute_force_two_bin(expo, -0.5)


def test_two_bin_oracle_matches_shooting(expo):
    res = solve_shooting(expo, GameConfig(bias=0.0, bins=2))
    assert brute_force_two_bin(expo, 0.0)[0] == pytest.approx(
        res.quantizer.edges[0], abs=1e-7)


def test_brute_force_equilibrium(uni, gauss, expo):
    edges = brute_force_equilibrium(uni, -0.05, 3)
    assert edges[0] == pytest.approx(0.13333333333333333, abs=1e-6)
    assert edges[1] == pytest.approx(0.46666666666666666, abs=1e-6)

    ref = solve_lloyd_max(gauss, GameConfig(bias=0.2, bins=3))
    got = brute_force_equilibrium(gauss, 0.2, 3)
    for a, b in zip(got, ref.quantizer.edges):
        assert a == pytest.approx(b, abs=1e-7)

    with pytest.raises(NoEquilibrium):
        brute_force_equilibrium(expo, -0.21, 3)
    with pytest.raises(ValueError):
        brute_force_equilibrium(expo, 0.0, 5)
    assert brute_force_equilibrium(expo, 0.0, 1) == ()


def test_brute_force_edges_verify_as_fixed_points(expo):
    edges = brute_force_equilibrium(expo, 0.1, 3)
    q = quantizer_from_edges(expo, edges)
    nn, cent = fixed_point_residuals(expo, q, 0.1)
    assert nn <= 1e-7 and cent <= 1e-7


def test_uniform_closed_form_values():
    assert uniform_closed_form(0.05, 2) == (0.6,)
    assert uniform_closed_form(-0.05, 2) == (0.4,)
    assert uniform_closed_form(0.0, 4) == (0.25, 0.5, 0.75)
    got = uniform_closed_form(0.05, 3)
    assert got[0] == pytest.approx(8.0 / 15.0, abs=1e-15)
    assert got[1] == pytest.approx(13.0 / 15.0, abs=1e-15)
    with pytest.raises(NoEquilibrium):
        uniform_closed_form(0.05, 4)
    with pytest.raises(NoEquilibrium):
        uniform_closed_form(0.3, 2)
    assert uniform_closed_form(0.3, 1) == ()


def test_uniform_closed_form_is_exact_fixed_point(uni):
    for bias, bins in [(0.05, 3), (-0.12, 2), (0.01, 6)]:
        edges = uniform_closed_form(bias, bins)
        q = quantizer_from_edges(uni, edges)
        nn, cent = fixed_point_residuals(uni, q, bias)
        assert nn <= 1e-12 and cent <= 1e-12


def test_comparison_matrix_agrees():
    rows = comparison_matrix(tol=1e-7)
    assert len(rows) >= 30
    for row in rows:
        assert row.agree, row
    # both verdicts occur in the default grid
    assert any(r.oracle_verdict == "none" for r in rows)
    assert any(r.oracle_verdict == "equilibrium" for r in rows)
