import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cayley_moser import Beta, Exponential, Gamma, Pareto, PolicyCurve, Uniform, reconstruct_offer_cdf
from cayley_moser.errors import DomainError, MomentInfinite, NotConcave, NotIncreasing, RateTooSmall
from cayley_moser.policy import Method

E = math.e


def test_worked_policy_values():
    assert PolicyCurve(Uniform(0, 1), 0.5, 1.0).mu(4.0) == pytest.approx(0.75, abs=1e-15)
    assert PolicyCurve(Exponential(1), 0.0, 1.0).mu(E - 1) == pytest.approx(1.0, abs=1e-15)
    curve = PolicyCurve(Pareto(1, 3), 1.5, 1.0)
    assert curve.c == pytest.approx(4 / 9, rel=1e-15)
    assert curve.mu(0.0) == 1.5


def test_psi_values():
    assert PolicyCurve(Exponential(1), 0.0, 1.0).psi(1.0) == pytest.approx(E - 1, rel=1e-15)
    assert PolicyCurve(Gamma(2, 1), 0.5, 1.0).psi(0.5) == 0.0


def test_low_salvage_uniform_matches_numeric():
    curve = PolicyCurve(Uniform(1, 3), 0.2, 2.0)
    assert curve.method is Method.CLOSED_UNIFORM_LOW_SALVAGE
    assert curve.t_star == pytest.approx(math.log((4 - 0.4) / 2) / 2)
    t = np.linspace(0, 20, 101)
    np.testing.assert_allclose(curve.mu(t, "generic"), curve.mu(t, "closed"), atol=1e-10)
    # mu reaches a exactly at t_star and is smooth there
    assert curve.mu(curve.t_star) == pytest.approx(1.0, abs=1e-14)


def test_ode_path_for_gamma():
    curve = PolicyCurve(Gamma(2, 1), 0.0, 1.0)
    assert curve.mu_ode(10.0) == pytest.approx(curve.mu(10.0), abs=1e-7)


@pytest.mark.parametrize(
    "curve,t,expected",
    [
        (PolicyCurve(Uniform(0, 1), 0.5, 1.0), 0.0, 0.125),
        (PolicyCurve(Exponential(1), 0.0, 1.0), 0.0, 1.0),
    ],
)
def test_mu_prime(curve, t, expected):
    assert curve.mu_prime(t) == pytest.approx(expected, rel=1e-14)


def test_mu_prime_vanishes_at_edge():
    assert PolicyCurve(Uniform(0, 1), 0.5, 1.0).mu_prime(1e6) < 1e-11


def test_hazard():
    assert PolicyCurve(Uniform(0, 1), 0.5, 1.0).h(0.0) == pytest.approx(0.5)
    assert PolicyCurve(Uniform(1, 3), 0.5, 2.0).h(0.0) == pytest.approx(2.0)


def test_moment_bound_values():
    curve = PolicyCurve(Uniform(0, 1), 0.0, 1.0)
    assert curve.bound_moment_p(2.0, 3.0) == pytest.approx(1.0, rel=1e-10)
    assert curve.mu(3.0) == pytest.approx(0.6)
    assert curve.bound_moment_p(2.0, 0.0) == 0.0
    pc = PolicyCurve(Pareto(1, 3), 1.5, 1.0)
    assert pc.bound_moment_p(2.0, 10.0) >= pc.mu(10.0)
    with pytest.raises(MomentInfinite):
        pc.bound_moment_p(3.0, 1.0)
    with pytest.raises(DomainError):
        pc.bound_moment_p(1.0, 1.0)


def test_exponential_bound_values():
    curve = PolicyCurve(Exponential(1), 0.0, 1.0)
    assert curve.bound_exponential(0.5, 10.0) == pytest.approx(2 * math.log(21), rel=1e-10)
    assert curve.mu(10.0) == pytest.approx(math.log(11))
    u = PolicyCurve(Uniform(0, 1), 0.0, 1.0)
    assert u.bound_exponential(1.0, 5.0) == pytest.approx(math.log((E - 1) * 5 + 1), rel=1e-10)
    assert u.mu(5.0) == pytest.approx(5 / 7)


def test_rows_and_csv(tmp_path):
    curve = PolicyCurve(Uniform(0, 1), 0.5, 1.0)
    path = tmp_path / "p.csv"
    curve.to_csv(path, [0.0, 4.0])
    lines = path.read_text().splitlines()
    assert lines[0] == "t,mu,mu_prime,h"
    assert lines[2].split(",")[:2] == ["4", "0.75"]


def test_construction_errors():
    with pytest.raises(DomainError):
        PolicyCurve(Uniform(0, 1), 1.0, 1.0)
    with pytest.raises(DomainError):
        PolicyCurve(Uniform(0, 1), 0.5, 0.0)
    with pytest.raises(DomainError):
        PolicyCurve(Uniform(0, 1), 0.5, 1.0).mu(-1.0)


def test_pareto_low_salvage_goes_numeric():
    curve = PolicyCurve(Pareto(1, 3), 0.5, 1.0)
    assert not curve.is_closed
    np.testing.assert_allclose(curve.mu([1.0, 10.0]), curve.mu_ode([1.0, 10.0]), rtol=1e-9)


CURVES = [
    PolicyCurve(Uniform(1, 3), 2.0, 1.0),
    PolicyCurve(Exponential(2), 2.0, 1.0),
    PolicyCurve(Pareto(1, 3), 1.5, 1.0),
    PolicyCurve(Beta(2, 3), 0.2, 3.0),
    PolicyCurve(Gamma(3, 0.5), 0.1, 0.5),
]


@settings(max_examples=40, deadline=None)
@given(idx=st.integers(0, len(CURVES) - 1), t=st.floats(0.01, 200.0), dt=st.floats(0.01, 50.0))
def test_policy_is_increasing_concave_with_falling_hazard(idx, t, dt):
    curve = CURVES[idx]
    a, b, c = curve.mu([t, t + dt, t + 2 * dt])
    assert a < b < c
    assert (c - b) <= (b - a) * (1 + 1e-9)
    assert curve.h(t + dt) <= curve.h(t) * (1 + 1e-12)
    assert curve.h(t) <= curve.lam * (1 + 1e-12)
    assert c < curve.M


@settings(max_examples=40, deadline=None)
@given(idx=st.integers(0, len(CURVES) - 1), t=st.floats(0.0, 100.0))
def test_policy_solves_its_ode(idx, t):
    curve = CURVES[idx]
    m = curve.mu(t)
    assert curve.psi(m, "generic") == pytest.approx(curve.lam * t, rel=1e-9, abs=1e-11)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0.0, 100.0), p=st.floats(1.1, 2.9))
def test_moment_bound_dominates(t, p):
    curve = PolicyCurve(Pareto(1, 3), 1.5, 1.0)
    assert curve.mu(t) <= curve.bound_moment_p(p, t) + 1e-12


# -- reconstruction -----------------------------------------------------------


def test_reconstruct_exponential():
    t = np.linspace(0.0, 50.0, 2001)
    mu = 2.0 * np.log(t + E)
    tab = reconstruct_offer_cdf(t, mu, 1.0)
    x = np.linspace(mu[0], mu[-1], 500)
    err = np.max(np.abs(tab.cdf(x) - (1 - np.exp(-x / 2))))
    assert err <= 1e-3


def test_reconstruct_uniform_upper_part():
    t = np.linspace(0.0, 200.0, 4001)
    mu = 1 - 2 / (t + 4)
    tab = reconstruct_offer_cdf(t, mu, 1.0, support_max=1.0)
    x = np.linspace(0.5, mu[-1], 500)
    assert np.max(np.abs(tab.cdf(x) - x)) <= 1e-3
    # the mass below mu0 collapses onto an atom there
    assert tab.F[0] == pytest.approx(0.5, abs=1e-3)


def test_reconstruct_rejects_bad_input():
    t = np.linspace(0.0, 5.0, 50)
    with pytest.raises(NotConcave):
        reconstruct_offer_cdf(t, t**2 + 1, 1.0)
    with pytest.raises(NotIncreasing):
        reconstruct_offer_cdf(t, -t, 1.0)
    mu = 1 - 2 / (t + 4)
    with pytest.raises(RateTooSmall):
        reconstruct_offer_cdf(t / 10, mu, 1.0)
    with pytest.raises(DomainError):
        reconstruct_offer_cdf(t[:3], mu[:3], 1.0)
