import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sgsp import criteria as cr
from sgsp import probes as pr
from sgsp import semigroups as sg
from sgsp.function_spaces import (
    Constant,
    ExpDecay,
    GridFunction,
    MonomialCombo,
    SpaceParams,
    lp_v_norm,
    periodize,
    tent,
    x_rho_norm,
    y_stau_norm,
)
from sgsp.shadowing import required_gap, shifted_distance_series

V = ExpDecay(1.0)
T = sg.Translation(V)


# densities ---------------------------------------------------------------------

def test_density_trivial_sets():
    full = pr.density_estimate([(0.0, math.inf)], 1e3, 0.1)
    assert full.upper == full.lower == 1.0
    empty = pr.density_estimate([], 1e3, 0.1)
    assert empty.upper == empty.lower == 0.0


def test_density_dyadic_union():
    est = pr.density_estimate(pr.dyadic_union(4.0 ** 10), 4.0 ** 10, 1.0)
    assert abs(est.upper - 2 / 3) <= 0.05
    assert abs(est.lower - 1 / 3) <= 0.05


def test_interval_measure_is_exact():
    rng = np.random.default_rng(0)
    ends = np.sort(rng.uniform(0, 100, size=20))
    intervals = list(zip(ends[::2], ends[1::2]))
    t = np.array([3.0, 17.5, 55.0, 99.0, 150.0])
    # brute force on disjoint sorted intervals
    ref = np.array([sum(max(0.0, min(b, s) - a) for a, b in intervals) for s in t])
    assert np.allclose(pr._measure_intervals(intervals, t), ref, rtol=0, atol=1e-12)
    overlapping = intervals + [(ends[0], ends[3])]
    merged = intervals[:1] + intervals[2:] + [(ends[0], ends[3])]
    assert np.allclose(pr._measure_intervals(overlapping, t), pr._measure_intervals(merged, t))


def test_boolean_series_counts_steps():
    flags = np.zeros(100000, dtype=bool)
    flags[::2] = True
    est = pr.density_estimate(flags, 10000.0, 0.1)
    assert est.lower == pytest.approx(0.5, abs=0.01) and est.upper == pytest.approx(0.5, abs=0.01)


def test_short_horizon_is_low_confidence():
    assert pr.density_estimate([], 5.0, 0.1).low_confidence
    assert not pr.density_estimate([], 500.0, 0.1).low_confidence


def test_density_grid_nested_across_horizons():
    a = pr.geometric_times(0.05, 1e4)
    b = pr.geometric_times(0.05, 2e4)
    assert np.array_equal(a, b[: a.size])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 500), st.floats(0, 50)), max_size=12),
       st.floats(10, 1000))
def test_density_bounds(raw, horizon):
    intervals = [(a, a + w) for a, w in raw]
    est = pr.density_estimate(intervals, horizon, 0.5)
    assert 0.0 <= est.lower <= est.upper <= 1.0
    assert np.all((est.ratios[:, 1] >= 0) & (est.ratios[:, 1] <= 1))


def test_density_preconditions():
    with pytest.raises(ValueError):
        pr.density_estimate([], 0.0, 1.0)


# mixing -----------------------------------------------------------------------------

def test_mixing_witness_example():
    u = tent()
    w = pr.mixing_witness(T, u, 0.5, 0.5, 12.0)
    assert w.in_uw and w.in_wu
    assert max(w.x_to_u, w.tx_norm, w.w_norm, w.tw_to_u) < 0.5
    # re-apply the engine
    assert abs(lp_v_norm(sg.translate(w.x, 12.0), V).upper - w.tx_norm) <= 1e-9
    assert abs(lp_v_norm(w.w, V).upper - w.w_norm) <= 1e-9
    back = shifted_distance_series(sg.translate(w.w, 12.0), u, np.array([0.0]), V, 1.0, 0.0125)[0]
    assert abs(back - w.tw_to_u) <= 1e-9


def test_mixing_zero_center_is_trivial():
    w = pr.mixing_witness(T, GridFunction(0.01, np.zeros(3), "zero"), 0.5, 0.5, 1.0)
    assert w.in_uw and w.in_wu and w.x.sup() == 0


def test_mixing_below_threshold():
    with pytest.raises(pr.ThresholdError, match="threshold"):
        pr.mixing_witness(T, tent(), 0.5, 0.5, 1.0)


def test_return_set_scan_bound():
    grid = np.round(np.arange(501) * 0.1, 10)
    rep = pr.return_set_scan(T, tent(), 0.5, 0.5, grid)
    M = required_gap(0.25, 1, V, 1).M
    assert rep.first_all_pass is not None and rep.first_all_pass <= math.ceil(M) + 1
    late = grid >= rep.first_all_pass
    assert np.all(rep.in_uw[late] & rep.in_wu[late])


def test_return_set_scan_constant_weight():
    rep = pr.return_set_scan(sg.Translation(Constant(1.0)), tent(), 0.5, 0.5, [5.0, 10.0])
    assert rep.status.startswith("mixing witnesses unavailable")
    assert rep.first_all_pass is None


def test_return_set_scan_whole_space():
    grid = np.round(np.arange(31) * 0.1, 10)
    rep = pr.return_set_scan(T, tent(), 0.5, math.inf, grid)
    assert rep.in_uw.all() and rep.in_wu.all() and rep.first_all_pass == 0.0


# periodic points ---------------------------------------------------------------------

def test_translation_periodic_approximant():
    res = pr.periodic_approximant(T, tent(), 0.3)
    assert res.error < 0.3
    q = res.q
    assert np.array_equal(sg.translate(q, res.period).samples, q.samples)


def test_zero_target_periodic_approximant():
    res = pr.periodic_approximant(T, GridFunction(0.01, np.zeros(4), "zero"), 0.3)
    assert res.error == 0.0 and res.q.sup() == 0.0


def test_blackscholes_eigen_monomial_is_periodic():
    bs = sg.BlackScholes(0.4, 0.05)
    theta = 1.0
    beta = bs.exponents_for(1j * theta)[0]
    assert abs(bs.eigenvalue(beta) - 1j * theta) < 1e-12
    res = pr.periodic_approximant(bs, MonomialCombo.monomial(beta), 0.1, theta=theta)
    assert res.error < 1e-10
    back = sg.blackscholes_apply(2 * math.pi / theta, res.q, bs) - res.q
    assert y_stau_norm(back, bs.space).value < 1e-8


def test_blackscholes_no_dictionary():
    bs = sg.BlackScholes(0.4, 0.05, SpaceParams(s=0.2))
    with pytest.raises(pr.NoEigenDictionaryError):
        pr.periodic_approximant(bs, MonomialCombo.monomial(0.1), 0.1)


def test_hhte_periodic_point_returns():
    h = sg.SecondOrder(1.0, 1.0, 3.0)
    res = pr.periodic_approximant(h, cr.hhte_field(h)(1.0), 0.1)
    assert res.error < 1e-10
    back = sg.second_order_apply(res.period, res.q, h).state
    assert x_rho_norm(back - res.q) < 1e-4


def test_hhte_random_target_truncation():
    # eigenvectors with |mu| near rho need more coefficients to return
    residuals = []
    for n in (60, 100):
        h = sg.SecondOrder(1.0, 1.0, 3.0, n)
        target = sg.random_state(h, np.random.default_rng(0))
        res = pr.periodic_approximant(h, target, 0.1)
        assert res.error == pytest.approx(x_rho_norm(res.q - target.padded(n)), rel=1e-12)
        residuals.append(res.return_residual)
    assert residuals[1] < residuals[0] and residuals[1] < 1e-8


# distributional irregularity --------------------------------------------------------

@pytest.fixture(scope="module")
def irregular():
    return pr.irregular_vector(V, 0.1, 1e4)


def test_irregular_vector_densities(irregular):
    assert irregular.big.upper >= 0.9 and irregular.small.upper >= 0.9
    assert irregular.f.sup() > 0


def test_irregular_norms_against_quad(irregular):
    f, b = irregular.f, irregular.boundaries
    for s in (0.0, 10.0, 25.0, 399.0, 5000.0):
        kinks = [x - s + d for x in b for d in (-0.05, 0.0) if 0 < x - s + d < 60]
        ref = quad(lambda x: f(np.array([x + s]))[0] * math.exp(-x), 0, 60,
                   points=kinks or None, limit=200)[0]
        k = int(round(s / 0.05))
        assert irregular.norms[k] == pytest.approx(ref, abs=1e-2)


def test_irregular_horizon_doubling(irregular):
    longer = pr.irregular_vector(V, 0.1, 2e4)
    assert longer.big.upper >= irregular.big.upper
    assert longer.small.upper >= irregular.small.upper


def test_irregular_threshold_monotone(irregular):
    big, _ = pr.irregular_densities(irregular.norms, 0.0, 0.05, 1e4, 0.05)
    assert big.upper <= irregular.big.upper


def test_irregular_refuses_divergent_weight():
    with pytest.raises(ValueError, match="divergent"):
        pr.irregular_vector(Constant(1.0), 0.1, 100.0)


# frequent hits ----------------------------------------------------------------------

def test_hits_unreachable_under_constant_weight():
    C = sg.Translation(Constant(1.0))
    x0 = tent()
    g = tent() * 3.0
    assert lp_v_norm(g, Constant(1.0)).value > lp_v_norm(x0, Constant(1.0)).value
    scan = pr.fh_hit_density(C, x0, [(g, 0.1)], 50.0, 0.1)
    assert scan.densities[0].lower == 0.0


def test_hits_infinite_radius():
    scan = pr.fh_hit_density(T, tent(), [(tent(), math.inf)], 20.0, 0.1)
    assert scan.densities[0].lower == 1.0


def test_hits_on_periodic_orbit():
    q = pr.periodic_approximant(T, tent(), 0.3).q
    scan = pr.fh_hit_density(T, q, [(q, 0.1)], 20 * q.period, 0.05)
    assert scan.densities[0].lower > 0
    # tiling by the period agrees with a direct scan
    direct = pr.orbit_distances(T, q, q, scan.times[:150], 0.005)
    assert np.allclose(direct, scan.distances[0][:150], atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.01, 0.5), st.floats(0.0, 0.5))
def test_hits_monotone_in_radius(r, extra):
    q = periodize(tent(), 4.0)
    scan = pr.fh_hit_density(T, q, [(tent(), r), (tent(), r + extra)], 40.0, 0.1)
    assert scan.densities[0].lower <= scan.densities[1].lower
