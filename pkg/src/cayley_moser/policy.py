"""Optimal threshold policy mu(t).

The threshold solves ``mu' = lam * phi(mu)``, ``mu(0) = mu0``, so
``mu(t) = Psi^{-1}(lam t)`` with ``Psi(x) = int_mu0^x du / phi(u)``.
Uniform, exponential and Pareto offers have explicit solutions; every other
model (and any curve built with ``numeric=True``) goes through the panel
table in :mod:`cayley_moser._tables`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from ._tables import PanelTable
from .distributions import Exponential, OfferModel, Pareto, Tabulated, Uniform
from .errors import (
    DomainError,
    NotApplicable,
    NotConcave,
    NotIncreasing,
    RateTooSmall,
    SecondMomentInfinite,
    StepUnderflow,
)
from .io import write_csv


class Method(enum.Enum):
    CLOSED_UNIFORM = "ClosedFormUniform"
    CLOSED_UNIFORM_LOW_SALVAGE = "ClosedFormUniformLowSalvage"
    CLOSED_EXPONENTIAL = "ClosedFormExponential"
    CLOSED_PARETO = "ClosedFormPareto"
    NUMERIC_PSI = "NumericPsi"


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# closed-form running integrals Psi, K, J, V


class _ClosedIntegrals:
    """Exact antiderivatives from mu0 of 1/phi, 1/phi^2, K/phi and I2/phi^2."""

    def psi(self, x): ...
    def K(self, x): ...
    def J(self, x): ...
    def V(self, x): ...


class _UniformIntegrals(_ClosedIntegrals):
    # Below a the offer is never accepted and phi(w) = m - w is linear;
    # above a, phi(w) = (b - w)^2 / (2 (b - a)).
    def __init__(self, a, b, mu0):
        self.a, self.b, self.mu0 = a, b, mu0
        self.w = b - a
        self.m = 0.5 * (a + b)
        self.base = max(mu0, a)
        if mu0 < a:
            v0, va = self.m - mu0, self.m - a
            self.psi_a = math.log(v0 / va)
            self.K_a = 1.0 / va - 1.0 / v0
            self.J_a = 1.0 / va - 1.0 / v0 - math.log(v0 / va) / v0
            d = 0.5 * self.w
            self.V_a = 0.5 * (a - mu0) + d * d / 6.0 * (1.0 / va - 1.0 / v0)
        else:
            self.psi_a = self.K_a = self.J_a = self.V_a = 0.0

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        lo = np.minimum(x, self.a)
        hi = np.maximum(x, self.base)
        return x, lo, hi

    def _join(self, x, low, up):
        return _ret(x, up if self.mu0 >= self.a else np.where(x < self.a, low(), up))

    def _psi_up(self, hi):
        return 2.0 * self.w * (1.0 / (self.b - hi) - 1.0 / (self.b - self.base))

    def psi(self, x):
        x, lo, hi = self._split(x)
        up = self.psi_a + self._psi_up(hi)
        return self._join(x, lambda: np.log((self.m - self.mu0) / (self.m - lo)), up)

    def K(self, x):
        x, lo, hi = self._split(x)
        up = self.K_a + (4.0 / 3.0) * self.w**2 * ((self.b - hi) ** -3 - (self.b - self.base) ** -3)
        return self._join(x, lambda: 1.0 / (self.m - lo) - 1.0 / (self.m - self.mu0), up)

    def J(self, x):
        x, lo, hi = self._split(x)
        r, r0 = self.b - hi, self.b - self.base
        ju = (8.0 / 3.0) * self.w**3 * (0.25 * (r**-4 - r0**-4) - r0**-3 * (1.0 / r - 1.0 / r0))
        up = self.J_a + self.K_a * self._psi_up(hi) + ju

        def low():
            v0, vl = self.m - self.mu0, self.m - lo
            return 1.0 / vl - 1.0 / v0 - np.log(v0 / vl) / v0

        return self._join(x, low, up)

    def V(self, x):
        x, lo, hi = self._split(x)
        d = 0.5 * self.w
        up = self.V_a + (2.0 / 3.0) * self.w * np.log((self.b - self.base) / (self.b - hi))
        return self._join(
            x, lambda: 0.5 * (lo - self.mu0) + d * d / 6.0 * (1.0 / (self.m - lo) - 1.0 / (self.m - self.mu0)), up
        )


class _ExponentialIntegrals(_ClosedIntegrals):
    def __init__(self, eta, mu0):
        self.eta, self.mu0 = eta, mu0
        self.E0 = math.exp(mu0 / eta)

    def _e(self, x):
        return np.exp(np.asarray(x, dtype=float) / self.eta)

    def psi(self, x):
        return _ret(x, self._e(x) - self.E0)

    def K(self, x):
        e = self._e(x)
        return _ret(x, (e * e - self.E0**2) / (2.0 * self.eta))

    def J(self, x):
        e, E0, eta = self._e(x), self.E0, self.eta
        return _ret(x, ((e**3 - E0**3) / 3.0 - E0**2 * (e - E0)) / (2.0 * eta))

    def V(self, x):
        return _ret(x, self.eta * (self._e(x) - self.E0))


class _ParetoIntegrals(_ClosedIntegrals):
    def __init__(self, xm, alpha, mu0):
        self.xm, self.al, self.mu0 = xm, alpha, mu0

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        a, xm, m0 = self.al, self.xm, self.mu0
        return _ret(x, (a - 1.0) / a * ((x / xm) ** a - (m0 / xm) ** a))

    def K(self, x):
        x = np.asarray(x, dtype=float)
        a, xm, m0 = self.al, self.xm, self.mu0
        n = 2.0 * a - 1.0
        return _ret(x, (a - 1.0) ** 2 / n * ((x / xm) ** n - (m0 / xm) ** n) / xm)

    def J(self, x):
        y = np.asarray(x, dtype=float) / self.xm
        a, z0 = self.al, self.mu0 / self.xm
        A = (a - 1.0) ** 3 / (2.0 * a - 1.0)
        out = A * ((y ** (3 * a - 1) - z0 ** (3 * a - 1)) / (3 * a - 1) - z0 ** (2 * a - 1) * (y**a - z0**a) / a)
        return _ret(x, out)

    def V(self, x):
        y = np.asarray(x, dtype=float) / self.xm
        a, z0 = self.al, self.mu0 / self.xm
        if a <= 2:
            raise SecondMomentInfinite(f"pareto alpha={a} has E[X^2] = inf")
        out = self.xm * (a - 1.0) / ((a - 2.0) * (a + 1.0)) * (y ** (a + 1) - z0 ** (a + 1))
        return _ret(x, out)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolicyCurve:
    """Optimal threshold ``mu(t)`` for offers ``offer`` arriving at rate ``lam``.

    Parameters
    ----------
    offer : OfferModel
    mu0 : float
        Mean salvage value, ``0 <= mu0 < M``.
    lam : float
        Poisson arrival rate of offers.
    numeric : bool
        Ignore any closed form and use the Psi table.
    """

    offer: OfferModel
    mu0: float
    lam: float
    numeric: bool = False
    method: Method = field(init=False)
    t_star: float | None = field(init=False, default=None)
    c: float | None = field(init=False, default=None)

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError("lambda must be positive and finite")
        if not (0.0 <= self.mu0 < self.offer.support_max):
            raise DomainError(f"need 0 <= mu0 < M, got mu0={self.mu0}, M={self.offer.support_max}")
        object.__setattr__(self, "mu0", float(self.mu0))
        off = self.offer
        method = Method.NUMERIC_PSI
        if not self.numeric:
            if isinstance(off, Uniform):
                if self.mu0 < off.a:
                    method = Method.CLOSED_UNIFORM_LOW_SALVAGE
                    ts = math.log((off.a + off.b - 2.0 * self.mu0) / (off.b - off.a)) / self.lam
                    object.__setattr__(self, "t_star", ts)
                else:
                    method = Method.CLOSED_UNIFORM
            elif isinstance(off, Exponential):
                method = Method.CLOSED_EXPONENTIAL
            elif isinstance(off, Pareto) and self.mu0 >= off.x_m:
                method = Method.CLOSED_PARETO
                a = off.alpha
                object.__setattr__(self, "c", a / (a - 1.0) * (off.x_m / self.mu0) ** a)
        object.__setattr__(self, "method", method)

    # -- plumbing ------------------------------------------------------------
    @property
    def is_closed(self) -> bool:
        return self.method is not Method.NUMERIC_PSI

    @property
    def M(self) -> float:
        return float(self.offer.support_max)

    @cached_property
    def table(self) -> PanelTable:
        """Numeric integral table (available for every curve)."""
        return PanelTable(self.offer, self.mu0)

    @cached_property
    def closed_integrals(self) -> _ClosedIntegrals:
        off = self.offer
        if isinstance(off, Uniform):
            return _UniformIntegrals(off.a, off.b, self.mu0)
        if isinstance(off, Exponential):
            return _ExponentialIntegrals(off.eta, self.mu0)
        if isinstance(off, Pareto) and self.mu0 >= off.x_m:
            return _ParetoIntegrals(off.x_m, off.alpha, self.mu0)
        raise NotApplicable(f"no closed form for {off.family} with mu0={self.mu0}")

    def integrals(self, method: str = "auto"):
        """Source of Psi, K, J, V: ``"closed"``, ``"generic"`` or ``"auto"``."""
        if method == "generic" or (method == "auto" and not self.is_closed):
            return self.table
        if method in ("closed", "auto"):
            return self.closed_integrals
        raise ValueError(f"unknown method {method!r}")

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(np.isnan(t)):
            raise DomainError("t must be >= 0")
        return t

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.mu0) or np.any(x >= self.M) or np.any(np.isnan(x)):
            raise DomainError(f"Psi is defined on [mu0, M) = [{self.mu0}, {self.M})")
        return x

    # -- policy ---------------------------------------------------------------
    def psi(self, x, method: str = "auto"):
        """Psi(x) = int_mu0^x du / phi(u)."""
        self._check_x(x)
        return self.integrals(method).psi(x)

    def mu(self, t, method: str = "auto"):
        """Optimal threshold with ``t`` time remaining."""
        ta = self._check_t(t)
        if method == "generic" or (method == "auto" and not self.is_closed):
            out = self.table.inv_psi(self.lam * ta)
        elif method in ("closed", "auto"):
            out = self._mu_closed(ta)
        else:
            raise ValueError(f"unknown method {method!r}")
        return _ret(t, out)

    def _mu_closed(self, t):
        lt = self.lam * t
        off, m0 = self.offer, self.mu0
        if self.method is Method.CLOSED_UNIFORM:
            k = 2.0 * (off.b - off.a) / (off.b - m0)
            return off.b - 2.0 * (off.b - off.a) / (lt + k)
        if self.method is Method.CLOSED_UNIFORM_LOW_SALVAGE:
            a, b = off.a, off.b
            early = 0.5 * (a + b - (a + b - 2.0 * m0) * np.exp(-lt))
            late = b - 2.0 * (b - a) / (self.lam * (t - self.t_star) + 2.0)
            return np.where(t <= self.t_star, early, late)
        if self.method is Method.CLOSED_EXPONENTIAL:
            return off.eta * np.log(lt + math.exp(m0 / off.eta))
        if self.method is Method.CLOSED_PARETO:
            return m0 * (self.c * lt + 1.0) ** (1.0 / off.alpha)
        raise NotApplicable("curve has no closed form")

    def mu_ode(self, t):
        """mu(t) by adaptive Runge-Kutta integration of mu' = lam phi(mu)."""
        ta = self._check_t(t)
        flat = ta.ravel()
        out = np.full(flat.shape, self.mu0)
        pos = flat > 0
        if np.any(pos):
            order = np.argsort(flat[pos])
            ts = flat[pos][order]
            lam, offer = self.lam, self.offer
            scale = max(1.0, abs(self.mu0))
            sol = integrate.solve_ivp(
                lambda _s, y: lam * np.asarray(offer.phi(y), dtype=float),
                (0.0, float(ts[-1])),
                [self.mu0],
                method="DOP853",
                t_eval=ts,
                rtol=1e-12,
                atol=1e-13 * scale,
                first_step=min(1e-3, float(ts[-1])) / max(lam, 1.0),
            )
            if not sol.success:
                raise StepUnderflow(sol.message)
            vals = np.empty_like(ts)
            vals[order] = sol.y[0]
            out[pos] = vals
        return _ret(t, out.reshape(ta.shape))

    def mu_prime(self, t, method: str = "auto"):
        return _ret(t, self.lam * np.asarray(self.offer.phi(self.mu(t, method)), dtype=float))

    def h(self, t, method: str = "auto"):
        """Acceptance hazard lam (1 - F(mu(t)))."""
        return _ret(t, self.lam * np.asarray(self.offer.sf(self.mu(t, method)), dtype=float))

    # -- bounds ---------------------------------------------------------------
    def bound_moment_p(self, p: float, t):
        """Upper bound mu0 + (E[(X - mu0)+^p] lam t)^(1/p), valid for p > 1."""
        if not p > 1:
            raise DomainError("moment bound needs p > 1")
        ta = self._check_t(t)
        m = self.offer.excess_moment(self.mu0, p)
        return _ret(t, self.mu0 + (m * self.lam * ta) ** (1.0 / p))

    def bound_exponential(self, delta: float, t):
        """Upper bound mu0 + log(E[exp(delta (X - mu0)+)] lam t + 1) / delta."""
        if not delta > 0:
            raise DomainError("exponential bound needs delta > 0")
        ta = self._check_t(t)
        m = self.offer.excess_mgf(self.mu0, delta)
        return _ret(t, self.mu0 + np.log1p(m * self.lam * ta) / delta)

    # -- export ---------------------------------------------------------------
    def rows(self, t_grid):
        t = self._check_t(np.atleast_1d(t_grid))
        return np.column_stack([t, self.mu(t), self.mu_prime(t), self.h(t)])

    def to_csv(self, path, t_grid) -> None:
        write_csv(path, ["t", "mu", "mu_prime", "h"], self.rows(t_grid))


# ---------------------------------------------------------------------------
# reconstruction of F from a sampled policy


def _second_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    h = np.diff(t)
    d2 = np.empty_like(y)
    d2[1:-1] = 2.0 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1]) / (h[1:] + h[:-1])
    d2[0] = 2.0 * d2[1] - d2[2]
    d2[-1] = 2.0 * d2[-2] - d2[-3]
    return d2


def reconstruct_offer_cdf(t, mu, lam: float, support_max: float | None = None, rate_rtol: float = 1e-3) -> Tabulated:
    """Recover the offer CDF from samples of an optimal policy.

    Uses ``F(mu(t)) = 1 - h(t) / lam`` with ``h = -mu'' / mu'`` estimated by
    finite differences.  The CDF is zero below ``mu(t[0])`` (so any mass the
    policy cannot see sits in an atom there) and reaches one at
    ``support_max``, or, when that is not given, where the last segment
    extrapolates to one.

    Raises
    ------
    NotIncreasing, NotConcave
        The samples cannot come from an optimal policy.
    RateTooSmall
        ``lam`` is below the estimated ``h(0+)``.
    """
    t = np.asarray(t, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if t.ndim != 1 or t.shape != mu.shape or t.size < 4:
        raise DomainError("need at least four (t, mu) samples")
    if np.any(np.diff(t) <= 0):
        raise DomainError("t samples must be strictly increasing")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if np.any(np.diff(mu) <= 0):
        raise NotIncreasing("policy samples are not strictly increasing")
    d1 = np.gradient(mu, t, edge_order=2)
    d2 = _second_derivative(t, mu)
    noise = 64.0 * np.finfo(float).eps * np.max(np.abs(mu)) / np.min(np.diff(t)) ** 2
    if np.max(d2[1:-1]) > noise:
        raise NotConcave("policy samples are not concave")
    d2 = np.minimum(d2, 0.0)
    if np.any(d1 <= 0):
        raise NotIncreasing("estimated derivative is not positive")
    h = -d2 / d1
    if h[0] > lam * (1.0 + rate_rtol):
        raise RateTooSmall(f"lambda={lam} is below the estimated h(0+)={h[0]}")
    F = np.clip(1.0 - h / lam, 0.0, 1.0)
    F = np.maximum.accumulate(F)
    xs, Fs = list(mu), list(F)
    if support_max is not None and math.isfinite(support_max):
        if support_max <= mu[-1]:
            raise DomainError("support_max must exceed the sampled thresholds")
        if Fs[-1] < 1.0:
            xs.append(float(support_max))
            Fs.append(1.0)
    elif Fs[-1] < 1.0:
        slope = (Fs[-1] - Fs[-2]) / (xs[-1] - xs[-2])
        if slope > 0:
            xs.append(xs[-1] + (1.0 - Fs[-1]) / slope)
        else:
            xs.append(xs[-1] + (xs[-1] - xs[0]))
        Fs.append(1.0)
    return Tabulated(np.array(xs), np.array(Fs))
