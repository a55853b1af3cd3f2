import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from lrperc.cumulant import (
    Law,
    MomentVector,
    cumulants_from_moments,
    entry_cumulants,
    entry_moments,
    expansion_check,
    function_library,
    imaginary_exponential,
    monomial,
    sine,
)


def log_mgf_cumulants(mgf, t):
    series = sp.series(sp.log(mgf), t, 0, 8).removeO()
    return [sp.nsimplify(series.coeff(t, r) * sp.factorial(r)) for r in (2, 4, 6)]


def test_gaussian_cumulants_vanish():
    k = cumulants_from_moments(MomentVector(1.0, 3.0, 15.0))
    assert (k.K2, k.K4, k.K6) == (1.0, 0.0, 0.0)


def test_rademacher_cumulants():
    k = cumulants_from_moments(MomentVector(1.0, 1.0, 1.0))
    assert (k.K2, k.K4, k.K6) == (1.0, -2.0, 16.0)
    t = sp.symbols("t")
    assert log_mgf_cumulants(sp.cosh(t), t) == [1, -2, 16]


def test_uniform_against_log_mgf_series():
    t = sp.symbols("t")
    a = sp.sqrt(3)
    oracle = log_mgf_cumulants(sp.sinh(a * t) / (a * t), t)
    assert oracle == [1, sp.Rational(-6, 5), sp.Rational(48, 7)]
    k = Law("uniform").cumulants()
    assert (k.K2, k.K4, k.K6) == pytest.approx([float(x) for x in oracle], rel=1e-14)


def test_odd_cumulants_zero():
    k = Law("uniform").cumulants()
    assert k.K(1) == k.K(3) == k.K(5) == 0.0


@pytest.mark.parametrize("bad", [(0.0, 1.0, 1.0), (1.0, 0.5, 1.0), (1.0, 3.0, 2.0)])
def test_moment_invariants(bad):
    with pytest.raises(ValueError):
        MomentVector(*bad)


def test_spec_examples():
    c = expansion_check("gaussian", monomial(3), 1)
    assert (c.lhs, c.rhs) == pytest.approx((3.0, 3.0), rel=1e-13)
    assert c.gap < 1e-12
    c = expansion_check("rademacher", monomial(3), 3)
    assert (c.lhs, c.rhs, c.gap) == (1.0, 1.0, 0.0)
    c = expansion_check("rademacher", monomial(3), 1)
    assert (c.lhs, c.rhs, c.gap, c.bound) == (1.0, 3.0, 2.0, 6.0)
    assert c.within_bound


@pytest.mark.parametrize("F", function_library(), ids=lambda f: f.name)
def test_gaussian_exact_at_q1(F):
    assert expansion_check("gaussian", F, 1).gap < 1e-9


@pytest.mark.parametrize("law", ["gaussian", "rademacher", "uniform"])
@pytest.mark.parametrize("deg", range(9))
def test_polynomial_exact_when_q_covers_degree(law, deg):
    for q in (1, 3, 5):
        if q >= deg:
            assert expansion_check(law, monomial(deg), q).gap < 1e-9


@pytest.mark.parametrize("law", ["gaussian", "rademacher", "uniform"])
@pytest.mark.parametrize("F", function_library(), ids=lambda f: f.name)
@pytest.mark.parametrize("q", [1, 3, 5])
def test_bound_respected(law, F, q):
    assert expansion_check(law, F, q).within_bound


def test_invalid_q():
    with pytest.raises(ValueError):
        expansion_check("gaussian", monomial(2), 2)
    with pytest.raises(ValueError):
        monomial(9)


def test_sine_sup_is_exact():
    # sin(x) on [-0.5, 0.5]: sup|F| is sin(0.5), sup|F'| is 1
    s = sine(1.0)
    assert s.sup_derivative(0, 0.5) == pytest.approx(math.sin(0.5))
    assert s.sup_derivative(1, 0.5) == 1.0
    assert imaginary_exponential(2.0).sup_derivative(3, 1.0) == 8.0


def test_abs_moments():
    assert Law("gaussian").abs_moment(3) == pytest.approx(2 * math.sqrt(2 / math.pi))
    assert Law("uniform").abs_moment(4) == pytest.approx(9 / 5)
    assert Law("rademacher", 2.0).abs_moment(5) == 32.0


def test_entry_cumulant_scaling():
    v2, V4, V6, b, psi = 1.3, 4.1, 20.0, 17.0, 0.42
    for diag in (False, True):
        s = 2.0 if diag else 1.0
        k = entry_cumulants(v2, V4, V6, psi, b, diag)
        assert k.K2 == pytest.approx(s * v2 * psi / b, rel=1e-12)
        delta = V4 * psi - 3 * v2 * v2 * psi * psi
        assert k.K4 == pytest.approx(s * s * delta / b**2, rel=1e-12)
    with pytest.raises(ValueError):
        entry_moments(1.0, 3.0, 15.0, 0.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(1.0, 5.0), st.floats(1.0, 5.0))
def test_conversion_matches_definition(mu2, r4, r6):
    m = MomentVector(mu2, r4 * mu2**2, r6 * r4 * mu2**3)
    k = cumulants_from_moments(m)
    assert k.K4 == pytest.approx(m.mu4 - 3 * mu2**2)
    assert k.K6 == pytest.approx(m.mu6 - 15 * m.mu4 * mu2 + 30 * mu2**3)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["gaussian", "rademacher", "uniform"]), st.floats(0.2, 3.0), st.floats(0.1, 2.0))
def test_law_expectations(kind, v, a):
    law = Law(kind, v)
    m = law.moments()
    assert law.expect(lambda x: x**2) == pytest.approx(m.mu2, rel=1e-12)
    assert law.expect(lambda x: x**4) == pytest.approx(m.mu4, rel=1e-12)
    # characteristic function is real for symmetric laws
    phi = law.expect(lambda x: np.exp(1j * a * x))
    assert abs(phi.imag) < 1e-14
