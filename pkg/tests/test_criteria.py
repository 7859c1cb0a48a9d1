import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgsp import criteria as cr
from sgsp import semigroups as sg
from sgsp.probes import orbit_distances
from sgsp.function_spaces import Constant, ExpDecay, GridFunction, tent

HHTE = sg.SecondOrder(1.0, 1.0, 3.0)


# gates -------------------------------------------------------------------------

def test_hhte_gate_examples():
    assert cr.hhte_parameter_gate(1, 1, 3)
    assert not cr.hhte_parameter_gate(1, 1, 1)
    assert not cr.hhte_parameter_gate(2, 1, 1)
    with pytest.raises(ValueError):
        cr.hhte_parameter_gate(0, 1, 3)


def test_blackscholes_gate_examples():
    # s nu = 4 * 0.4 / sqrt 2 = 1.131..
    assert cr.blackscholes_parameter_gate(4, 0, 0.4)
    assert not cr.blackscholes_parameter_gate(4, 0, 0.2)
    for sigma in (0.1, 2.0, 50.0):
        assert not cr.blackscholes_parameter_gate(1, 0, sigma)
    assert not cr.blackscholes_parameter_gate(4, -0.1, 0.4)


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 10))
def test_gates_are_pure(a, b, c):
    assert cr.hhte_parameter_gate(a, b, c) == cr.hhte_parameter_gate(a, b, c) == (a * b * c > 2)
    assert cr.blackscholes_parameter_gate(a, b, c) == cr.blackscholes_parameter_gate(a, b, c)


# dichotomy ---------------------------------------------------------------------------

def test_equivalences_expdecay():
    rep = cr.translation_equivalences(ExpDecay(1.0))
    assert rep.integral_verdict == "finite"
    assert rep.integral_value == pytest.approx(1.0, abs=1e-9)
    assert all(rep.items().values())
    assert rep.overall == "consistent"
    assert max(rep.periodic_errors) < 0.3


def test_equivalences_constant():
    rep = cr.translation_equivalences(Constant(1.0))
    assert rep.integral_verdict == "divergent" and math.isinf(rep.integral_value)
    assert rep.gap_refused and rep.shadowing_detail.startswith("refused")
    assert rep.items()["(iv) eigenfield in space"] is False
    assert rep.fh_evidence and all(d == 0 for d in rep.fh_evidence)
    assert rep.overall == "consistent"
    assert "overall: consistent" in rep.summary()


@pytest.mark.parametrize("level", [0.5, 3.0])
def test_divergent_never_shadows(level):
    rep = cr.translation_equivalences(Constant(level), config=cr.EquivalenceConfig(suite_size=2))
    assert not (rep.shadowing_ok and rep.integral_verdict == "divergent")


def test_dictionary_orbit_visits_every_target():
    handle = sg.Translation(ExpDecay(1.0))
    x0, targets = cr._dictionary_orbit(handle, cr.default_dictionary(), 0.15)
    assert x0.extension == "periodic"
    times = np.arange(0, x0.period, 0.5)
    for y in targets:
        assert orbit_distances(handle, x0, y, times).min() < 0.15


# eigenvector fields ---------------------------------------------------------------------

def test_translation_eigenfield():
    handle = sg.Translation(ExpDecay(1.0))
    rep = cr.eigenfield_check(handle, cr.translation_field(), np.linspace(-1, 1, 5))
    # difference quotient error t^2 h / 2 at most
    assert rep.residual_sup < 1e-3
    assert rep.boundedness == pytest.approx(1.0, abs=1e-3)


def test_hhte_eigenfield_residual():
    rep = cr.eigenfield_check(HHTE, cr.hhte_field(HHTE), np.linspace(-1, 1, 21))
    assert rep.residual_sup < 1e-8 and not rep.rejected


def test_hhte_eigenfield_improves_with_truncation():
    sups = []
    for n in (20, 40, 60):
        h = sg.SecondOrder(1.0, 1.0, 3.0, n)
        sups.append(cr.eigenfield_check(h, cr.hhte_field(h), np.linspace(-1, 1, 21)).residual_sup)
    for a, b in zip(sups, sups[1:]):
        assert b <= a * (1 + 1e-6) + 1e-14


def test_hhte_field_rejects_outside_space():
    h = sg.SecondOrder(1.0, 1.0, 0.5)
    rep = cr.eigenfield_check(h, cr.hhte_field(h), [0.1, 5.0])
    assert [t for t, _ in rep.rejected] == [5.0]
    assert "rho" in rep.rejected[0][1]


def test_blackscholes_eigenfield():
    bs = sg.BlackScholes(0.4, 0.05)
    rep = cr.eigenfield_check(bs, cr.blackscholes_field(bs), np.linspace(-1, 1, 11))
    assert rep.residual_sup < 1e-10


def test_zero_field_is_degenerate():
    handle = sg.Translation(ExpDecay(1.0))
    zero = lambda t: GridFunction(0.01, np.zeros(50, dtype=complex), "zero")
    rep = cr.eigenfield_check(handle, zero, [0.0, 0.5], dictionary={"tent": tent()})
    assert rep.residual_sup == 0.0
    assert rep.degenerate and not rep.satisfied
    assert "degenerate" in rep.summary()


def test_span_surrogate_nonincreasing():
    ts = np.linspace(-1, 1, 15)
    target = cr.hhte_field(HHTE)(0.37) * 0.5 + cr.hhte_field(HHTE)(-0.8)
    rep = cr.eigenfield_check(HHTE, cr.hhte_field(HHTE), ts, dictionary={"mix": target})
    series = rep.span_surrogate["mix"]
    assert len(series) == ts.size
    assert all(b <= a for a, b in zip(series, series[1:]))
    assert series[-1] < 1e-2 and rep.satisfied


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=8, unique=True))
def test_span_residuals_nested(ts):
    rng = np.random.default_rng(0)
    vecs = [np.exp(1j * t * np.arange(12)) for t in ts]
    target = rng.normal(size=12)
    res = cr._span_residuals(vecs, target)
    assert all(r >= 0 for r in res)
    assert all(b <= a for a, b in zip(res, res[1:]))
