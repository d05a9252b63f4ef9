import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cayley_moser import (
    Beta,
    Exponential,
    Pareto,
    PolicyCurve,
    Uniform,
    atom_prob,
    export_stop,
    stop_cdf,
    stop_law,
    stop_mean,
    stop_var,
    that_cdf,
)

E = math.e


def uniform_curve():
    return PolicyCurve(Uniform(1, 3), 2.0, 1.0)


def exponential_curve():
    return PolicyCurve(Exponential(2), 2.0, 1.0)


def test_point_values():
    assert stop_cdf(uniform_curve(), 4.0, 2.0) == pytest.approx(0.4375, abs=1e-15)
    assert stop_cdf(exponential_curve(), 10.0, 5.0) == pytest.approx(5 / (10 + E), rel=1e-14)
    assert stop_cdf(uniform_curve(), 4.0, 0.0) == 0.0
    assert stop_cdf(uniform_curve(), 4.0, 4.0) == 1.0
    assert atom_prob(uniform_curve(), 4.0) == pytest.approx(0.25, abs=1e-15)
    assert atom_prob(exponential_curve(), 10.0) == pytest.approx(E / (10 + E), rel=1e-14)
    assert atom_prob(uniform_curve(), 0.0) == 1.0


def test_moments():
    assert stop_mean(uniform_curve(), 4.0) == pytest.approx(7 / 3, abs=1e-12)
    assert stop_mean(exponential_curve(), 10.0) == pytest.approx(5 * (1 + E / (10 + E)), abs=1e-12)
    assert stop_mean(uniform_curve(), 0.0) == 0.0
    assert stop_var(uniform_curve(), 0.0) == 0.0


def uniform_var_display(t, k=4.0, lam=1.0):
    lt = lam * t
    return lt**3 * (lt**3 + 6 * k * lt**2 + 15 * k**2 * lt + 12 * k**3) / (18 * (lt + k) ** 4) / lam**2


def exponential_var_display(t, lam=1.0):
    # variance of the mixture: uniform on [0, t) with mass t/(t+e), atom at t
    lt = lam * t
    return lt**3 * (lt + 4 * E) / (12 * (lt + E) ** 2) / lam**2


@pytest.mark.parametrize("t", [0.5, 4.0, 10.0, 100.0])
def test_variance_against_direct_moments(t):
    # second moment by integrating the survival 2 r (1 - H(r)) over [0, t]
    for curve in (uniform_curve(), exponential_curve(), PolicyCurve(Pareto(1, 1.5), 3.0, 1.0)):
        m1 = integrate.quad(lambda r: 1 - stop_cdf(curve, t, r), 0, t, epsabs=1e-13, epsrel=1e-13)[0]
        m2 = integrate.quad(lambda r: 2 * r * (1 - stop_cdf(curve, t, r)), 0, t, epsabs=1e-13, epsrel=1e-13)[0]
        assert stop_mean(curve, t) == pytest.approx(m1, rel=1e-10)
        assert stop_var(curve, t) == pytest.approx(m2 - m1**2, rel=1e-9)


def test_uniform_variance_display():
    assert stop_var(uniform_curve(), 4.0) == pytest.approx(64 * 2176 / 73728, rel=1e-12)
    for t in (1.0, 4.0, 30.0):
        assert stop_var(uniform_curve(), t) == pytest.approx(uniform_var_display(t), rel=1e-12)


def test_exponential_variance_display():
    assert stop_var(exponential_curve(), 10.0) == pytest.approx(1e3 * (10 + 4 * E) / (12 * (10 + E) ** 2), rel=1e-12)
    for t in (1.0, 10.0, 300.0):
        assert stop_var(exponential_curve(), t) == pytest.approx(exponential_var_display(t), rel=1e-12)
    # any eta gives the same law when mu0 = eta
    other = PolicyCurve(Exponential(7.5), 7.5, 1.0)
    assert stop_var(other, 10.0) == pytest.approx(stop_var(exponential_curve(), 10.0), rel=1e-12)


def test_exponential_cdf_is_linear():
    r = np.linspace(0, 10, 101)[:-1]
    np.testing.assert_allclose(stop_cdf(exponential_curve(), 10.0, r), r / (10 + E), atol=1e-12)


def test_pareto_cdf_display():
    alpha = 1.5
    curve = PolicyCurve(Pareto(1, alpha), 3.0, 1.0)
    c = curve.c
    r = np.linspace(0, 30, 61)[:-1]
    ref = 1 - (1 - c * r / (c * 30 + 1)) ** (1 - 1 / alpha)
    np.testing.assert_allclose(stop_cdf(curve, 30.0, r), ref, atol=1e-14)


def test_normalized_cdf():
    curve = exponential_curve()
    assert that_cdf(curve, 10.0, 0.5) == pytest.approx(5 / (10 + E), rel=1e-14)
    assert that_cdf(curve, 10.0, 0.0) == 0.0
    below = that_cdf(curve, 10.0, 1 - 1e-12)
    assert below == pytest.approx(1 - atom_prob(curve, 10.0), abs=1e-10)


def test_closed_and_generic_agree(worked):
    _, _, curve = worked
    for t in (0.1, 3.0, 40.0):
        r = np.linspace(0, t, 50)[:-1]
        np.testing.assert_allclose(stop_cdf(curve, t, r, "generic"), stop_cdf(curve, t, r, "closed"), atol=1e-11)
        assert stop_mean(curve, t, "generic") == pytest.approx(stop_mean(curve, t, "closed"), rel=1e-10)
        assert stop_var(curve, t, "generic") == pytest.approx(stop_var(curve, t, "closed"), rel=1e-9)


def test_export(tmp_path):
    law = export_stop(uniform_curve(), 4.0, [0, 2, 4], tmp_path / "s.csv", tmp_path / "s.json")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "r,H"
    data = json.loads((tmp_path / "s.json").read_text())
    assert set(data) == {"t", "atom", "mean", "var"}
    assert law == stop_law(uniform_curve(), 4.0)


@settings(max_examples=40, deadline=None)
@given(t=st.floats(0.01, 500.0), s=st.floats(0.0, 1.0), ds=st.floats(0.0, 0.5))
def test_cdf_monotone_and_bounded(t, s, ds):
    curve = PolicyCurve(Beta(2, 3), 0.3, 1.0)
    a, b = stop_cdf(curve, t, [s * t, min(s + ds, 1.0) * t])
    assert 0.0 <= a <= b <= 1.0
