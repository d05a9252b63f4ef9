import json
import math

import numpy as np
import pytest
from scipy import integrate

from cayley_moser import (
    Beta,
    Exponential,
    Gamma,
    Pareto,
    PolicyCurve,
    ResidualSpec,
    Tabulated,
    Uniform,
    export_price,
    price_cdf,
    price_mean,
    price_pdf,
    price_var,
)
from cayley_moser.errors import DomainError, NoDensity, SecondMomentInfinite

E = math.e


def _uniform_setup(a=1.0, b=3.0):
    u = Uniform(a, b)
    return PolicyCurve(u, u.mean, 1.0), ResidualSpec.same_as(u)


def uniform_density_display(x, t, a=1.0, b=3.0, lam=1.0):
    k = lam * t + 4
    w = b - a
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        mid = 8 / 3 * (w**3 / (b - x) ** 3 - 2)
    val = np.select(
        [x < a, x < (a + b) / 2, x < b - 2 * w / k, x < b],
        [0.0, 16.0, mid, (k**3 - 16) / 3],
        0.0,
    )
    return val / (w * k**2)


def exponential_density_display(x, t, eta=2.0, lam=1.0):
    L = lam * t + E
    x = np.asarray(x, dtype=float)
    y = x / eta
    return np.select(
        [x < 0, x < eta, x < eta * math.log(L)],
        [0.0, E / L * np.exp(-y) / eta, E / L * (0.5 * np.exp(y - 1) - 0.5 * np.exp(1 - y) + np.exp(-y)) / eta],
        (L - (E - 2) * E / L) * np.exp(-y) / (2 * eta),
    )


def pareto_density_display(x, t, xm=1.0, alpha=3.0, lam=1.0):
    mu0 = alpha / (alpha - 1) * xm
    c = ((alpha - 1) / alpha) ** (alpha - 1)
    L = c * lam * t + 1
    m = mu0 * L ** (1 / alpha)
    x = np.asarray(x, dtype=float)
    br = np.where(x < mu0, 0.0, np.where(x < m, (x / mu0) ** (2 * alpha - 1) - 1, L ** ((2 * alpha - 1) / alpha) - 1))
    return (alpha - 1) * mu0**alpha / L ** (1 - 1 / alpha) / x ** (alpha + 1) * (c + alpha / (2 * alpha - 1) * br)


def uniform_var_display(t, a=1.0, b=3.0, lam=1.0):
    return 4 * (b - a) ** 2 / (3 * (lam * t + 4) ** 2) * (2 * math.log(lam * t / 4 + 1) + 1)


def exponential_var_display(t, eta=2.0, lam=1.0):
    return (1 + lam * t / (lam * t + E)) * eta**2


def pareto_var_display(t, xm=1.0, alpha=3.0, lam=1.0):
    c = ((alpha - 1) / alpha) ** (alpha - 1)
    L = c * lam * t + 1
    return alpha * xm**2 / ((alpha - 2) * (alpha**2 - 1)) * (2 * alpha / (alpha - 1) * L ** (2 / alpha) - L ** (-(alpha - 1) / alpha))


@pytest.mark.parametrize("t", [0.5, 2.0, 10.0, 100.0])
def test_densities_match_displays(t):
    curve, res = _uniform_setup()
    x = np.linspace(0.5, 3.5, 301)
    np.testing.assert_allclose(price_pdf(curve, res, t, x), uniform_density_display(x, t), atol=1e-12)
    e = Exponential(2.0)
    ce, re = PolicyCurve(e, 2.0, 1.0), ResidualSpec.same_as(e)
    x = np.linspace(-1, 30, 301)
    np.testing.assert_allclose(price_pdf(ce, re, t, x), exponential_density_display(x, t), atol=1e-13)
    p = Pareto(1.0, 3.0)
    cp, rp = PolicyCurve(p, 1.5, 1.0), ResidualSpec.same_as(p)
    x = np.linspace(1.0, 20, 301)
    np.testing.assert_allclose(price_pdf(cp, rp, t, x), pareto_density_display(x, t), rtol=1e-11)


def test_density_point_values():
    curve, res = _uniform_setup()
    assert price_pdf(curve, res, 2.0, 1.5) == pytest.approx(16 / 72, rel=1e-14)
    assert price_cdf(curve, res, 2.0, 2.0) == pytest.approx(16 / 72, rel=1e-14)
    assert price_cdf(curve, res, 2.0, 1e9) == 1.0
    assert price_pdf(curve, res, 2.0, 0.5) == 0.0
    e = Exponential(2.0)
    ce, re = PolicyCurve(e, 2.0, 1.0), ResidualSpec.same_as(e)
    assert price_pdf(ce, re, 10.0, 1.0) == pytest.approx(0.5 * E / (10 + E) * math.exp(-0.5), rel=1e-14)


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 10.0, 1e3])
def test_variances_match_displays(t):
    curve, res = _uniform_setup()
    assert price_var(curve, res, t) == pytest.approx(uniform_var_display(t), rel=1e-12)
    e = Exponential(2.0)
    assert price_var(PolicyCurve(e, 2.0, 1.0), ResidualSpec.same_as(e), t) == pytest.approx(exponential_var_display(t), rel=1e-12)
    p = Pareto(1.0, 3.0)
    assert price_var(PolicyCurve(p, 1.5, 1.0), ResidualSpec.same_as(p), t) == pytest.approx(pareto_var_display(t), rel=1e-12)


def test_variance_endpoints():
    curve, res = _uniform_setup(0.0, 1.0)
    assert price_var(curve, res, 0.0) == pytest.approx(1 / 12)
    e = Exponential(2.0)
    ce, re = PolicyCurve(e, 2.0, 1.0), ResidualSpec.same_as(e)
    assert price_var(ce, re, 0.0) == pytest.approx(4.0)
    assert price_var(ce, re, 1e12) == pytest.approx(8.0, rel=1e-10)
    p = Pareto(1.0, 3.0)
    assert price_var(PolicyCurve(p, 1.5, 1.0), ResidualSpec.same_as(p), 0.0) == pytest.approx(0.75)


def test_mean_is_policy():
    curve = PolicyCurve(Uniform(0, 1), 0.5, 1.0)
    assert price_mean(curve, 4.0) == pytest.approx(0.75)
    assert price_mean(curve, 0.0) == 0.5
    e = PolicyCurve(Exponential(2), 2.0, 1.0)
    assert price_mean(e, 10.0) == pytest.approx(2 * math.log(10 + E))


def test_time_zero_is_residual_law():
    curve, res = _uniform_setup()
    x = np.linspace(0, 4, 41)
    np.testing.assert_allclose(price_cdf(curve, res, 0.0, x), res.cdf(x), atol=1e-15)


def _mass_and_mean(curve, res, t):
    lo, hi = curve.offer.support_min, curve.offer.support_max
    kinks = [curve.mu0, float(curve.mu(t))]
    g = lambda x: float(price_pdf(curve, res, t, x))  # noqa: E731
    if math.isfinite(hi):
        mass = integrate.quad(g, lo, hi, points=kinks, limit=200, epsabs=1e-13)[0]
        mean = integrate.quad(lambda x: x * g(x), lo, hi, points=kinks, limit=200, epsabs=1e-13)[0]
    else:
        mass = sum(integrate.quad(g, a, b, limit=200, epsabs=1e-13)[0] for a, b in zip([lo] + kinks, kinks + [np.inf]))
        mean = sum(integrate.quad(lambda x: x * g(x), a, b, limit=200, epsabs=1e-13)[0] for a, b in zip([lo] + kinks, kinks + [np.inf]))
    return mass, mean


@pytest.mark.parametrize(
    "offer,res_kind",
    [(Beta(2, 3), "same"), (Gamma(2, 1), "same"), (Uniform(1, 3), "tab")],
    ids=["beta", "gamma", "tabulated-residual"],
)
def test_generic_density_integrates(offer, res_kind):
    if res_kind == "same":
        res = ResidualSpec.same_as(offer)
    else:
        res = ResidualSpec.custom(Tabulated([1.0, 2.0, 2.6], [0.0, 0.5, 1.0]))
    curve = PolicyCurve(offer, res.mean, 1.5)
    mass, mean = _mass_and_mean(curve, res, 3.0)
    assert mass == pytest.approx(1.0, abs=1e-6)
    assert mean == pytest.approx(curve.mu(3.0), abs=1e-6)


def test_residual_with_atom_has_no_density():
    u = Uniform(0, 1)
    curve = PolicyCurve(u, 0.3, 1.0)
    res = ResidualSpec.point(0.3)
    with pytest.raises(NoDensity):
        price_pdf(curve, res, 1.0, 0.5)
    # the jump of G at the salvage value is the no-sale probability
    jump = price_cdf(curve, res, 1.0, 0.3) - price_cdf(curve, res, 1.0, 0.3 - 1e-12)
    assert jump == pytest.approx(float(u.phi(curve.mu(1.0)) / u.phi(0.3)), rel=1e-9)


def test_infinite_variance():
    p = Pareto(1, 1.5)
    curve = PolicyCurve(p, 3.0, 1.0)
    with pytest.raises(SecondMomentInfinite):
        price_var(curve, ResidualSpec.same_as(p), 2.0)


def test_mismatched_residual_rejected():
    curve = PolicyCurve(Uniform(0, 1), 0.5, 1.0)
    with pytest.raises(DomainError):
        price_cdf(curve, ResidualSpec.zero(), 1.0, 0.5)


def test_export(tmp_path):
    curve, res = _uniform_setup()
    s = export_price(curve, res, 2.0, [1.0, 2.0, 3.0], tmp_path / "p.csv", tmp_path / "p.json")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x,G,g"
    data = json.loads((tmp_path / "p.json").read_text())
    assert data["mean"] == pytest.approx(curve.mu(2.0))
    assert s.var == pytest.approx(uniform_var_display(2.0))


def test_cdf_is_monotone_with_correct_limits(worked):
    offer, res, curve = worked
    x = np.linspace(offer.support_min - 1, offer.support_min + 20, 2001)
    for t in (0.5, 5.0, 50.0):
        G = price_cdf(curve, res, t, x)
        assert np.all(np.diff(G) >= -1e-14)
        assert G[0] == 0.0
        assert price_cdf(curve, res, t, 1e12) == pytest.approx(1.0, abs=1e-9)
