import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from sgsp.function_spaces import (
    CoefficientPair,
    Constant,
    ExpDecay,
    GridFunction,
    InconclusiveTailError,
    MonomialCombo,
    RationalDecay,
    SpaceParams,
    TableWeight,
    admissibility_check,
    dumps_grid,
    dumps_weight,
    grid_from_callable,
    loads_grid,
    loads_weight,
    lp_v_norm,
    periodize,
    tail_integral,
    tent,
    x_rho_norm,
    y_stau_norm,
)


# weights ------------------------------------------------------------------

def test_tail_integral_examples():
    assert tail_integral(ExpDecay(1.0), math.log(10)) == pytest.approx(0.1, rel=1e-14)
    assert math.isinf(tail_integral(Constant(1.0), 0.0))
    assert tail_integral(RationalDecay(2.0), 0.0) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("v", [ExpDecay(0.7), ExpDecay(2.0), RationalDecay(2.0), RationalDecay(3.5)])
@pytest.mark.parametrize("cut", [0.0, 0.5, 3.0])
def test_tail_matches_quad(v, cut):
    ref, _ = quad(v, cut, np.inf, epsabs=1e-14, epsrel=1e-12)
    assert tail_integral(v, cut) == pytest.approx(ref, rel=1e-9)


@given(st.floats(0.05, 5.0), st.floats(0.0, 20.0))
def test_expdecay_tail_closed_form(rate, cut):
    assert ExpDecay(rate).tail(cut) == math.exp(-rate * cut) / rate


def test_cut_for_tail_inverts_tail():
    for v in (ExpDecay(1.3), RationalDecay(2.5)):
        for target in (0.3, 1e-3, 1e-8):
            c = v.cut_for_tail(target)
            assert v.tail(c) <= target * (1 + 1e-9)
            assert v.tail(max(c - 1e-6, 0.0)) > target * (1 - 1e-6)


def test_table_weight_compact_support():
    v = TableWeight(np.array([0.0, 0.5, 1.0]), np.array([1.0, 2.0, 1.0]), beyond="zero")
    assert v.tail(0.0) == pytest.approx(1.5)
    assert v.tail(1.0) == 0.0
    assert v(np.array([2.0]))[0] == 0.0


def test_table_weight_unknown_tail_heuristics():
    x = np.linspace(0, 60, 6001)
    finite = TableWeight(x, np.exp(-x))
    assert finite.tail(0.0) == pytest.approx(1.0, rel=1e-4)
    flat = TableWeight(x, np.ones_like(x))
    assert math.isinf(flat.tail(0.0))
    slow = TableWeight(x, 1.0 / (1.0 + x))
    with pytest.raises(InconclusiveTailError):
        slow.tail(0.0)


def test_weight_validation():
    with pytest.raises(ValueError):
        ExpDecay(0.0)
    with pytest.raises(ValueError):
        TableWeight(np.array([0.0, 1.0]), np.array([1.0, 0.0]))


def test_admissibility_examples():
    xs, ts = np.linspace(0, 20, 201), np.linspace(0, 10, 101)
    r = admissibility_check(ExpDecay(1.0), xs, ts, 1.0)
    assert r.verdict == "admissible (empirical)"
    assert r.M_min == pytest.approx(1.0, rel=1e-12)
    r = admissibility_check(Constant(1.0), xs, ts, 0.0)
    assert r.verdict == "admissible (empirical)" and r.M_min == 1.0
    g = np.linspace(0, 12, 1201)
    gauss = TableWeight(g, np.exp(-g ** 2))
    r = admissibility_check(gauss, np.linspace(0, 6, 121), np.linspace(0, 6, 121), 3.0)
    assert r.verdict == "not admissible"


def test_weight_serialization_round_trip():
    for v in (ExpDecay(1.5), Constant(2.0), RationalDecay(3.0),
              TableWeight(np.array([0.0, 1.0]), np.array([1.0, 0.5]), "zero", (2.0, 0.0))):
        w = loads_weight(dumps_weight(v))
        x = np.linspace(0, 3, 31)
        assert np.array_equal(w(x), v(x))
        assert w.admissible_params == v.admissible_params


# grid functions -------------------------------------------------------------

def test_grid_function_extensions():
    f = grid_from_callable(lambda x: x, 0.5, 2.0)
    assert f(np.array([0.25, 2.0, 2.5]))[2] == 0.0
    assert f(np.array([0.25]))[0] == pytest.approx(0.25)
    p = GridFunction(0.5, np.array([0.0, 1.0, 0.0]), "periodic", 1.0)
    assert p(np.array([3.5]))[0] == p(np.array([0.5]))[0] == 1.0
    with pytest.raises(ValueError):
        GridFunction(0.5, np.array([0.0, np.nan]), "zero")
    with pytest.raises(ValueError):
        GridFunction(0.3, np.zeros(5), "periodic", 1.0)


def test_grid_samples_are_read_only():
    f = tent()
    with pytest.raises(ValueError):
        f.samples[0] = 3.0


def test_grid_serialization_round_trip():
    for f in (tent(), periodize(tent(), 3.0), tent() * (1 + 2j)):
        g = loads_grid(dumps_grid(f))
        assert np.array_equal(g.samples, f.samples)
        assert (g.h, g.extension, g.period) == (f.h, f.extension, f.period)


# L^p_v norm -----------------------------------------------------------------

def test_lp_norm_of_one_is_weight_mass():
    one = GridFunction(0.01, np.ones(101), "periodic", 1.0)
    est = lp_v_norm(one, ExpDecay(1.0))
    assert est.value == pytest.approx(1.0, abs=1e-4)
    assert est.upper >= 1.0 - 1e-4


def test_lp_norm_zero():
    est = lp_v_norm(GridFunction(0.1, np.zeros(10), "zero"), ExpDecay(1.0))
    assert est == (0.0, 0.0)


def test_lp_norm_tent_closed_form():
    exact = (1 - math.exp(-1)) ** 2
    assert lp_v_norm(tent(0.001), ExpDecay(1.0)).value == pytest.approx(exact, abs=1e-6)


def test_lp_norm_divergent_periodic():
    est = lp_v_norm(periodize(tent(), 3.0), Constant(1.0))
    assert est.verdict == "infinite norm"


def test_lp_norm_p2_against_quad():
    f = tent(0.001)
    exact = math.sqrt(quad(lambda x: max(0.0, 1 - abs(x - 1)) ** 2 * math.exp(-x), 0, 2,
                           points=[1.0])[0])
    assert lp_v_norm(f, ExpDecay(1.0), 2.0).value == pytest.approx(exact, rel=1e-6)


def test_quadrature_converges_quadratically():
    # nonzero end slopes keep the h^2 Euler-Maclaurin term alive
    fn = lambda x: x * (3 - x)
    exact = quad(lambda x: fn(x) * math.exp(-x), 0, 3)[0]
    errs = [abs(lp_v_norm(grid_from_callable(fn, h, 3.0), ExpDecay(1.0)).value - exact)
            for h in (0.04, 0.02, 0.01)]
    for a, b in zip(errs, errs[1:]):
        assert 3.5 <= a / b <= 4.5


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.integers(0, 2 ** 31))
def test_lp_norm_homogeneity(alpha, seed):
    rng = np.random.default_rng(seed)
    f = GridFunction(0.05, rng.normal(size=60), "zero")
    v = ExpDecay(1.0)
    assert lp_v_norm(f * alpha, v).value == pytest.approx(abs(alpha) * lp_v_norm(f, v).value,
                                                          rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_lp_norm_triangle(seed):
    rng = np.random.default_rng(seed)
    f = GridFunction(0.05, rng.normal(size=60), "zero")
    g = GridFunction(0.05, rng.normal(size=60), "zero")
    v = RationalDecay(2.0)
    assert lp_v_norm(f + g, v).value <= lp_v_norm(f, v).value + lp_v_norm(g, v).value + 1e-12


# X_rho -----------------------------------------------------------------------

def test_x_rho_norm_examples():
    n = 20
    assert x_rho_norm(CoefficientPair(3.0, 0.5 ** np.arange(n + 1), np.zeros(n + 1))) == 1.0
    assert x_rho_norm(CoefficientPair.zeros(3.0, n)) == 0.0
    a = np.zeros(n + 1)
    a[3] = 5.0
    b = np.zeros(n + 1)
    b[0] = 2.0
    assert x_rho_norm(CoefficientPair(3.0, a, b)) == 5.0


def test_coefficient_pair_evaluates_series():
    a = (0.5 / 3.0) ** np.arange(40)
    u = CoefficientPair(3.0, a, np.zeros(40))
    # sum (0.5 x)^n / n! = e^{0.5 x}
    assert u.evaluate(1.3)[0] == pytest.approx(math.exp(0.65), rel=1e-13)


# Y^{s,tau} -------------------------------------------------------------------

def test_y_norm_constant():
    assert y_stau_norm(MonomialCombo.monomial(0.0), SpaceParams(s=4)).value == pytest.approx(0.5)


def test_y_norm_zero():
    assert y_stau_norm(MonomialCombo(()), SpaceParams()).value == 0.0


def test_y_norm_linear_against_maximizer():
    fn = lambda lx: -math.exp(lx) / (2 * (1 + math.exp(4 * lx)))
    res = minimize_scalar(fn, bounds=(-5, 5), method="bounded", options={"xatol": 1e-12})
    assert -res.fun == pytest.approx(3 * 3 ** -0.25 / 8, rel=1e-12)
    est = y_stau_norm(MonomialCombo.monomial(1.0), SpaceParams(s=4))
    assert est.value == pytest.approx(-res.fun, rel=1e-7)


def test_y_norm_survives_large_exponents():
    u = MonomialCombo(((3.9, 1e200), (3.9 + 1j, 1e200)))
    assert math.isfinite(y_stau_norm(u, SpaceParams(s=4)).value)


def test_monomial_combo_rules():
    with pytest.raises(ValueError):
        MonomialCombo(((1.0, 1.0), (1.0, 2.0)))
    u = MonomialCombo.monomial(2.0, 3.0) + MonomialCombo.monomial(2.0, -1.0)
    assert len(u.terms) == 1 and u(np.array([2.0]))[0] == pytest.approx(8.0)
