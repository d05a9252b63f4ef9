"""Large-t behaviour of the policy, the sale price and the time to sale.

The right tail of F decides everything:

* ``BoundedEdge(p, c)``: ``phi(x) ~ c (M - x)^(p+1)`` at a finite ``M``;
* ``ExponentialTail(c)``: ``-log(1 - F(x)) ~ c x``;
* ``PowerLaw(p)``: ``phi`` regularly varying with index ``-(p+1)``.

The normalized time to sale ``T_t / t`` then has the limit law
``1 - (1 - s)^gamma`` with ``gamma = 1 + 1/p``, ``1`` and ``(p+1)/(p+2)``.
Power-law tails only fix regular-variation indices, so value queries for
that class return :class:`RVExponent` rather than a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .distributions import (
    Beta,
    Exponential,
    Frechet,
    Gamma,
    OfferModel,
    Pareto,
    ResidualSpec,
    Uniform,
)
from .errors import DomainError, NonPositiveValue, NotApplicable, UnknownTail
from .policy import PolicyCurve
from .price import price_var
from .stoptime import stop_mean, stop_var, that_cdf

BOUNDED_EDGE = "BoundedEdge"
EXPONENTIAL_TAIL = "ExponentialTail"
POWER_LAW = "PowerLaw"


@dataclass(frozen=True)
class TailClass:
    kind: str
    p: float | None = None
    c: float | None = None

    def __post_init__(self):
        if self.kind == BOUNDED_EDGE:
            if not (self.p and self.p > 0 and self.c and self.c > 0):
                raise DomainError("bounded edge needs p > 0 and c > 0")
        elif self.kind == EXPONENTIAL_TAIL:
            if not (self.c and self.c > 0):
                raise DomainError("exponential tail needs c > 0")
        elif self.kind == POWER_LAW:
            if self.p is None or not self.p > -1:
                raise DomainError("power-law tail needs p > -1")
        else:
            raise DomainError(f"unknown tail kind {self.kind!r}")

    @property
    def gamma(self) -> float:
        if self.kind == BOUNDED_EDGE:
            return 1.0 + 1.0 / self.p
        if self.kind == EXPONENTIAL_TAIL:
            return 1.0
        return (self.p + 1.0) / (self.p + 2.0)

    def as_dict(self) -> dict:
        out = {"class": self.kind}
        if self.p is not None:
            out["p"] = self.p
        if self.c is not None:
            out["c"] = self.c
        out["gamma"] = self.gamma
        return out


@dataclass(frozen=True)
class RVExponent:
    """Regular-variation index of a quantity whose prefactor is not determined."""

    index: float


def beta_edge_constant(alpha: float, beta: float) -> float:
    """Gamma(alpha + beta) / (Gamma(alpha) Gamma(beta + 2))."""
    return math.exp(math.lgamma(alpha + beta) - math.lgamma(alpha) - math.lgamma(beta + 2.0))


def classify_tail(model: OfferModel) -> TailClass:
    if isinstance(model, Uniform):
        return TailClass(BOUNDED_EDGE, 1.0, 1.0 / (2.0 * (model.b - model.a)))
    if isinstance(model, Beta):
        return TailClass(BOUNDED_EDGE, float(model.beta), beta_edge_constant(model.alpha, model.beta))
    if isinstance(model, (Exponential, Gamma)):
        return TailClass(EXPONENTIAL_TAIL, None, 1.0 / model.eta)
    if isinstance(model, (Pareto, Frechet)):
        return TailClass(POWER_LAW, model.alpha - 2.0, None)
    raise UnknownTail(f"no analytic tail class for {model!r}; use rv_diagnostic")


def mu_asymptotic(cls: TailClass, curve: PolicyCurve, t, require_value: bool = False):
    """Leading-order large-t form of mu(t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t must be positive")
    if cls.kind == BOUNDED_EDGE:
        out = curve.M - (curve.lam * cls.p * cls.c * t) ** (-1.0 / cls.p)
    elif cls.kind == EXPONENTIAL_TAIL:
        out = np.log(t) / cls.c
    else:
        if require_value:
            raise NotApplicable("power-law tails fix only the regular-variation index of mu")
        return RVExponent(1.0 / (cls.p + 2.0))
    return float(out) if out.ndim == 0 else out


def _edge_bracket(curve: PolicyCurve, residual: ResidualSpec) -> float:
    offer, mu0, M = curve.offer, curve.mu0, curve.M

    def f(w):
        p = float(offer.phi(w))
        if p <= 0:
            return 0.0
        return float(offer.var_excess(w)) / (p * p)

    val, _ = integrate.quad(f, mu0, M, limit=400, epsabs=0.0, epsrel=1e-9)
    return (M - mu0) + residual.variance / float(offer.phi(mu0)) + val


def var_asymptotic(cls: TailClass, curve: PolicyCurve, residual: ResidualSpec, t, require_value: bool = False):
    """Leading-order large-t form of Var[S_t]."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t must be positive")
    lam = curve.lam
    if cls.kind == BOUNDED_EDGE:
        p, c = cls.p, cls.c
        if p < 1:
            const = _edge_bracket(curve, residual) / ((lam * p) ** ((p + 1.0) / p) * c ** (1.0 / p))
            out = const * t ** (-(p + 1.0) / p)
        elif p == 1:
            out = 2.0 / (3.0 * lam**2 * c**2) * np.log(t) / t**2
        else:
            out = 2.0 / ((p - 1.0) * (p + 2.0)) * (lam * p * c * t) ** (-2.0 / p)
    elif cls.kind == EXPONENTIAL_TAIL:
        out = np.full(t.shape, 2.0 / cls.c**2)
    else:
        if require_value:
            raise NotApplicable("power-law tails fix only the regular-variation index of Var[S_t]")
        return RVExponent(2.0 / (cls.p + 2.0))
    return float(out) if out.ndim == 0 else out


def that_limit(cls: TailClass, s):
    """Limit CDF 1 - (1 - s)^gamma of T_t / t."""
    s = np.asarray(s, dtype=float)
    out = np.where(s < 0, 0.0, np.where(s >= 1, 1.0, 1.0 - np.clip(1.0 - s, 0.0, 1.0) ** cls.gamma))
    return float(out) if out.ndim == 0 else out


def that_limit_moments(cls: TailClass) -> tuple[float, float]:
    g = cls.gamma
    return 1.0 / (g + 1.0), g / ((g + 1.0) ** 2 * (g + 2.0))


def rv_diagnostic(fn: Callable[[float], float], t: float, doublings: int) -> tuple[np.ndarray, float]:
    """Successive ``log2(fn(2 s) / fn(s))`` for ``s = t, 2t, ...``.

    Returns the sequence and its last element as the index estimate.
    """
    if doublings < 1:
        raise DomainError("need at least one doubling")
    probes = [float(fn(t * 2.0**k)) for k in range(doublings + 1)]
    if any(not (v > 0) for v in probes):
        raise NonPositiveValue("regular-variation probe needs positive values")
    seq = np.diff(np.log2(probes))
    return seq, float(seq[-1])


# ---------------------------------------------------------------------------
# convergence report


def _check(name: str, statistic: float, threshold: float) -> dict:
    return {"name": name, "statistic": float(statistic), "threshold": float(threshold), "pass": bool(statistic <= threshold)}


def asymptotics_report(curve: PolicyCurve, residual: ResidualSpec) -> dict:
    """Classify the tail and check the large-t formulas against exact values.

    Each check records the statistic, its threshold and the verdict.  Rate
    checks are only included where the leading term dominates at the probe
    time (gamma offers approach their exponential-tail limits at a
    logarithmic rate, so only their index and limit-law checks are run).
    """
    offer = curve.offer
    cls = classify_tail(offer)
    g = cls.gamma
    checks = []

    _, est = rv_diagnostic(curve.mu_prime, 1e3, 6)
    checks.append(_check("mu_prime_rv_index", abs(est + g), 0.02))

    s = np.linspace(0.0, 0.999, 1000)
    sup = float(np.max(np.abs(that_cdf(curve, 1e4, s) - that_limit(cls, s))))
    checks.append(_check("that_sup_distance_t1e4", sup, 0.02))

    m, v = that_limit_moments(cls)
    T = 1e5
    checks.append(_check("stop_mean_over_t_t1e5", abs(stop_mean(curve, T) / T / m - 1.0), 0.01))
    checks.append(_check("stop_var_over_t2_t1e5", abs(stop_var(curve, T) / T**2 / v - 1.0), 0.01))

    var_ok = math.isfinite(residual.variance) and math.isfinite(offer.variance)
    if cls.kind == BOUNDED_EDGE:
        t = 1e4
        approx = mu_asymptotic(cls, curve, t)
        # the leading correction M - approx sets the scale of the residual
        checks.append(_check("mu_edge_residual_t1e4", abs(curve.mu(t) - approx) / (curve.M - approx), 0.05))
        if var_ok:
            tv = 1e8 if cls.p == 1 else (1e5 if cls.p < 1 else 1e6)
            ratio = price_var(curve, residual, tv) / var_asymptotic(cls, curve, residual, tv)
            checks.append(_check(f"var_ratio_t{tv:.0e}".replace("+0", ""), abs(ratio - 1.0), 0.05))
    elif cls.kind == EXPONENTIAL_TAIL and isinstance(offer, Exponential):
        t = 1e6
        checks.append(_check("mu_over_log_t_t1e6", abs(curve.mu(t) * cls.c / math.log(t) - 1.0), 0.02))
        if var_ok:
            ratio = price_var(curve, residual, t) / var_asymptotic(cls, curve, residual, t)
            checks.append(_check("var_ratio_t1e6", abs(ratio - 1.0), 0.05))
    elif cls.kind == POWER_LAW:
        _, est = rv_diagnostic(curve.mu, 1e3, 6)
        checks.append(_check("mu_rv_index", abs(est - 1.0 / (cls.p + 2.0)), 0.02))
        if var_ok:
            _, est = rv_diagnostic(lambda t: price_var(curve, residual, t), 1e3, 6)
            checks.append(_check("var_rv_index", abs(est - 2.0 / (cls.p + 2.0)), 0.02))

    out = {"family": offer.family, "params": offer.params()}
    out.update(cls.as_dict())
    lim_mean, lim_var = that_limit_moments(cls)
    out["limit_moments"] = {"mean": lim_mean, "var": lim_var}
    out["checks"] = checks
    return out
