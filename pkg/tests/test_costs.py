import math

import pytest

from quanteq import (GameConfig, backward_recursion, babbling_equilibrium,
                     decoder_cost, encoder_cost_by_integration,
                     infinite_cost, informativeness_table, quantizer_from_edges,
                     solve_lloyd_max, solve_shooting)
from quanteq.equilibrium import Quantizer

# J^{d,N} for the exponential source at bias 0.1 (40-digit recursion + exact
# per-bin masses/variances)
EXP_COSTS_B01 = {
    2: 0.3618760400749645,
    3: 0.2008538195439895,
    4: 0.1419989772444467,
    5: 0.11713239464214663,
    6: 0.1059285949457733,
    7: 0.10072835183921649,
    8: 0.098280685954894184,
}


def test_babbling_costs(gauss, uni):
    assert decoder_cost(gauss, babbling_equilibrium(gauss).quantizer
                        ).decoder_cost == pytest.approx(1.0, abs=1e-12)
    assert decoder_cost(uni, babbling_equilibrium(uni).quantizer
                        ).decoder_cost == pytest.approx(1 / 12, abs=1e-14)


def test_uniform_two_bin_cost(uni):
    q = quantizer_from_edges(uni, [0.5])
    report = decoder_cost(uni, q)
    assert report.decoder_cost == pytest.approx(1.0 / 48.0, abs=1e-14)
    assert [b.mass for b in report.per_bin] == [0.5, 0.5]


def test_exponential_recursion_costs(expo):
    for bins, expected in EXP_COSTS_B01.items():
        q = quantizer_from_edges(expo, backward_recursion(1.0, 0.1, bins).edges)
        report = decoder_cost(expo, q, bias=0.1)
        assert report.decoder_cost == pytest.approx(expected, abs=1e-10)
        assert report.encoder_cost - report.decoder_cost == pytest.approx(
            0.01, abs=1e-14)


def test_per_bin_consistency(gauss):
    res = solve_lloyd_max(gauss, GameConfig(bias=-0.2, bins=5))
    report = decoder_cost(gauss, res.quantizer, bias=-0.2)
    assert sum(b.mass for b in report.per_bin) == pytest.approx(1.0, abs=1e-12)
    total = sum(b.mass * b.conditional_variance for b in report.per_bin)
    assert total == pytest.approx(report.decoder_cost, abs=1e-10)


def test_informative_beats_babbling(expo):
    q = quantizer_from_edges(expo, backward_recursion(1.0, 0.1, 2).edges)
    assert decoder_cost(expo, q).decoder_cost < expo.variance()


@pytest.mark.parametrize("d_name,bias,method", [
    ("gauss", 0.2, "lloyd"), ("gauss", -0.3, "auto"),
    ("expo", 0.1, "shooting"), ("uni", 0.05, "auto"),
])
def test_encoder_cost_identity_vs_integration(request, d_name, bias, method):
    d = request.getfixturevalue(d_name)
    res = (solve_shooting if method == "shooting" else solve_lloyd_max)(
        d, GameConfig(bias=bias, bins=3))
    direct = encoder_cost_by_integration(d, res.quantizer, bias)
    assert direct == pytest.approx(res.decoder_cost + bias * bias, abs=1e-10)
    assert res.encoder_cost == res.decoder_cost + bias * bias


def test_informativeness_table_gaussian(gauss):
    rows = informativeness_table(gauss, 0.2, range(1, 7))
    costs = [r.report.decoder_cost for r in rows]
    assert all(r.status == "converged" for r in rows)
    assert all(a > b for a, b in zip(costs, costs[1:]))


def test_informativeness_table_flags_infeasible(uni):
    rows = informativeness_table(uni, 0.05, range(1, 5))
    assert [r.status for r in rows[:3]] == ["converged"] * 3
    assert rows[3].status in ("NoEquilibrium", "collapsed")
    assert rows[3].report is None
    costs = [r.report.decoder_cost for r in rows[:3]]
    assert all(a > b for a, b in zip(costs, costs[1:]))


def test_exponential_costs_approach_limit(expo):
    rows = informativeness_table(expo, 0.1, range(2, 9), method="shooting")
    limit = infinite_cost(1.0, 0.1)
    costs = [r.report.decoder_cost for r in rows]
    for a, b in zip(costs, costs[1:]):
        assert a > b > limit
    assert costs[-1] - limit < 0.003


def test_cost_report_rejects_empty_bin(uni):
    q = Quantizer(edges=(0.5,), centroids=(0.25, 0.75),
                  support=uni.support)
    # shift the quantizer onto a support where one bin has no mass
    from quanteq import BinCollapse, Uniform

    narrow = Uniform(0.0, 0.5 + 1e-12)
    with pytest.raises(BinCollapse):
        decoder_cost(narrow, q)
