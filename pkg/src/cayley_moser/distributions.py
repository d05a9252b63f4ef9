"""Offer and residual (salvage) distributions.

Every offer model exposes its CDF, survival function, optional density,
quantile, support maximum ``M``, and the excess-value function

    phi(x) = E[(X - x)+] = integral_x^inf (1 - F(u)) du,

which drives every formula downstream.  Uniform, exponential, Pareto and
tabulated models evaluate ``phi`` and its tail integral in closed form; the
Beta, Gamma and Frechet families integrate the survival function
numerically.

All models are immutable and their methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import csv
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import (
    DomainError,
    MgfInfinite,
    MomentInfinite,
    NoDensity,
    SecondMomentInfinite,
    TailNotIntegrable,
)

# Relative tolerance for the survival-function quadratures.
QUAD_RTOL = 1e-12


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def _quad(func: Callable[[float], float], lo: float, hi: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=QUAD_RTOL, limit=400)
    return val


def integrate_to_sup(func: Callable[[float], float], lo: float, hi: float, scale: float) -> float:
    """Integrate ``func`` over ``[lo, hi)``, where ``hi`` may be ``inf``.

    Unbounded ranges use ``u = lo + scale * s / (1 - s)`` so the integral is
    taken over ``s`` in ``[0, 1)`` with no truncation point.
    """
    if hi <= lo:
        return 0.0
    if math.isfinite(hi):
        return _quad(func, lo, hi)

    def mapped(s: float) -> float:
        if s >= 1.0:
            return 0.0
        w = 1.0 - s
        u = lo + scale * s / w
        if not math.isfinite(u):
            return 0.0
        return func(u) * scale / (w * w)

    return _quad(mapped, 0.0, 1.0)


class Distribution(ABC):
    """Minimal interface shared by offer models and residual laws."""

    mean: float
    variance: float
    has_density: bool

    @abstractmethod
    def cdf(self, x): ...

    @abstractmethod
    def quantile(self, u): ...

    def pdf(self, x):
        raise NoDensity(f"{type(self).__name__} has no density")

    def _check_u(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0.0) | (u >= 1.0)) or np.any(np.isnan(u)):
            raise DomainError("quantile requires 0 < u < 1")
        return u


class OfferModel(Distribution):
    """An offer distribution F with E[X+] finite."""

    family: str = ""
    support_min: float = -math.inf
    support_max: float = math.inf
    has_density: bool = True

    @property
    def kinks(self) -> tuple[float, ...]:
        """Points where phi is not analytic (breakpoints for panel quadrature)."""
        return ()

    def params(self) -> dict:
        return {}

    @abstractmethod
    def sf(self, x): ...

    @abstractmethod
    def phi(self, x): ...

    @abstractmethod
    def phi_tail_integral(self, x): ...

    def var_excess(self, w):
        """Var[(X - w)+] = 2 * int_w^inf phi - phi(w)^2."""
        i2 = self.phi_tail_integral(w)
        p = self.phi(w)
        return np.maximum(2.0 * np.asarray(i2) - np.asarray(p) ** 2, 0.0) if np.ndim(w) else max(
            2.0 * i2 - p * p, 0.0
        )

    def tail_scale(self, x: float) -> float:
        """Length scale used to map an unbounded tail onto [0, 1)."""
        return 1.0

    def _check_second_moment(self) -> None:
        pass

    # -- quadrature fallbacks -------------------------------------------------
    def sf_from_top(self, v):
        """Survival function at ``M - v`` for a finite support maximum ``M``."""
        return self.sf(self.support_max - np.asarray(v, dtype=float))

    def _phi_quad(self, x: float) -> float:
        if x >= self.support_max:
            return 0.0
        if x < self.support_min:
            return self._phi_quad(self.support_min) + (self.support_min - x)
        if math.isfinite(self.support_max):
            # integrate in v = M - u so nodes near M keep full relative precision
            return _quad(lambda v: float(self.sf_from_top(v)), 0.0, self.support_max - x)
        return integrate_to_sup(lambda u: float(self.sf(u)), x, self.support_max, self.tail_scale(x))

    def _tail_quad(self, x: float) -> float:
        if x >= self.support_max:
            return 0.0
        if x < self.support_min:
            lo = self.support_min
            # phi(u) = phi(lo) + (lo - u) below the support
            d = lo - x
            return self._tail_quad(lo) + self._phi_quad(lo) * d + 0.5 * d * d
        if math.isfinite(self.support_max):
            top = self.support_max - x
            return _quad(lambda v: (top - v) * float(self.sf_from_top(v)), 0.0, top)
        return integrate_to_sup(
            lambda u: (u - x) * float(self.sf(u)), x, self.support_max, self.tail_scale(x)
        )

    # -- moments used by the policy bounds -------------------------------------
    def _moment_finite(self, p: float) -> bool:
        return True

    def _mgf_finite(self, delta: float) -> bool:
        return math.isfinite(self.support_max)

    def excess_moment(self, mu0: float, p: float) -> float:
        """E[(X - mu0)+^p] by quadrature of p (u - mu0)^(p-1) (1 - F(u))."""
        if not self._moment_finite(p):
            raise MomentInfinite(f"E[X+^{p}] is infinite for {self.family}")
        lo = max(mu0, self.support_min) if math.isfinite(self.support_min) else mu0
        head = 0.0
        if lo > mu0:
            # sf == 1 on [mu0, support_min)
            head = (lo - mu0) ** p
        return head + integrate_to_sup(
            lambda u: p * (u - mu0) ** (p - 1.0) * float(self.sf(u)),
            lo,
            self.support_max,
            self.tail_scale(lo),
        )

    def excess_mgf(self, mu0: float, delta: float) -> float:
        """E[exp(delta (X - mu0)+)] = 1 + int_mu0^inf delta e^{delta(u - mu0)} (1 - F(u)) du."""
        if not self._mgf_finite(delta):
            raise MgfInfinite(f"E[exp({delta} X+)] is infinite for {self.family}")
        lo = max(mu0, self.support_min) if math.isfinite(self.support_min) else mu0
        head = math.expm1(delta * (lo - mu0)) if lo > mu0 else 0.0

        def integrand(u):
            sf = float(self.sf(u))
            if sf <= 0.0:
                return 0.0
            return delta * math.exp(min(delta * (u - mu0) + math.log(sf), 700.0))

        return 1.0 + head + integrate_to_sup(
            integrand,
            lo,
            self.support_max,
            self.tail_scale(lo),
        )


# ---------------------------------------------------------------------------
# closed-form families


@dataclass(frozen=True)
class Uniform(OfferModel):
    a: float = 0.0
    b: float = 1.0
    family: str = field(default="uniform", init=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError("uniform requires b > a")

    @property
    def support_min(self):
        return self.a

    @property
    def support_max(self):
        return self.b

    @property
    def mean(self):
        return 0.5 * (self.a + self.b)

    @property
    def variance(self):
        return (self.b - self.a) ** 2 / 12.0

    @property
    def kinks(self):
        return (self.a,)

    def params(self):
        return {"a": self.a, "b": self.b}

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.clip((self.b - x) / (self.b - self.a), 0.0, 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where((x >= self.a) & (x < self.b), 1.0 / (self.b - self.a), 0.0)
        return _scalar_or_array(x, out)

    def quantile(self, u):
        u = self._check_u(u)
        return _scalar_or_array(u, self.a + u * (self.b - self.a))

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.a, self.b
        inner = (b - np.clip(x, a, b)) ** 2 / (2.0 * (b - a))
        out = np.where(x < a, 0.5 * (a + b) - x, inner)
        return _scalar_or_array(x, out)

    def phi_tail_integral(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.a, self.b
        inner = (b - np.clip(x, a, b)) ** 3 / (6.0 * (b - a))
        below = 0.5 * (a - x) * (b - x) + (b - a) ** 2 / 6.0
        return _scalar_or_array(x, np.where(x < a, below, inner))


@dataclass(frozen=True)
class Exponential(OfferModel):
    eta: float = 1.0
    family: str = field(default="exponential", init=False)

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError("exponential requires eta > 0")

    support_min = 0.0
    support_max = math.inf

    @property
    def mean(self):
        return self.eta

    @property
    def variance(self):
        return self.eta**2

    @property
    def kinks(self):
        return (0.0,)

    def params(self):
        return {"eta": self.eta}

    def tail_scale(self, x):
        return self.eta

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.where(x > 0, -np.expm1(-np.maximum(x, 0) / self.eta), 0.0))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.where(x > 0, np.exp(-np.maximum(x, 0) / self.eta), 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0, np.exp(-np.maximum(x, 0) / self.eta) / self.eta, 0.0)
        return _scalar_or_array(x, out)

    def quantile(self, u):
        u = self._check_u(u)
        return _scalar_or_array(u, -self.eta * np.log1p(-u))

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        eta = self.eta
        out = np.where(x >= 0, eta * np.exp(-np.maximum(x, 0) / eta), eta - x)
        return _scalar_or_array(x, out)

    def phi_tail_integral(self, x):
        x = np.asarray(x, dtype=float)
        eta = self.eta
        out = np.where(x >= 0, eta**2 * np.exp(-np.maximum(x, 0) / eta), eta**2 - eta * x + 0.5 * x * x)
        return _scalar_or_array(x, out)

    def _mgf_finite(self, delta):
        return delta * self.eta < 1.0


@dataclass(frozen=True)
class Pareto(OfferModel):
    x_m: float = 1.0
    alpha: float = 3.0
    family: str = field(default="pareto", init=False)

    def __post_init__(self):
        if not self.x_m > 0:
            raise DomainError("pareto requires x_m > 0")
        if not self.alpha > 1:
            raise TailNotIntegrable("pareto requires alpha > 1 for E[X+] < inf")

    support_max = math.inf

    @property
    def support_min(self):
        return self.x_m

    @property
    def mean(self):
        return self.alpha * self.x_m / (self.alpha - 1.0)

    @property
    def variance(self):
        a = self.alpha
        if a <= 2:
            return math.inf
        return a * self.x_m**2 / ((a - 1.0) ** 2 * (a - 2.0))

    @property
    def kinks(self):
        return (self.x_m,)

    def params(self):
        return {"x_m": self.x_m, "alpha": self.alpha}

    def tail_scale(self, x):
        return max(abs(x), self.x_m)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, self.x_m)
        return _scalar_or_array(x, np.where(x >= self.x_m, -np.expm1(self.alpha * np.log(self.x_m / xs)), 0.0))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, self.x_m)
        return _scalar_or_array(x, np.where(x >= self.x_m, (self.x_m / xs) ** self.alpha, 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, self.x_m)
        out = np.where(x >= self.x_m, self.alpha * self.x_m**self.alpha / xs ** (self.alpha + 1.0), 0.0)
        return _scalar_or_array(x, out)

    def quantile(self, u):
        u = self._check_u(u)
        return _scalar_or_array(u, self.x_m * (1.0 - u) ** (-1.0 / self.alpha))

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        a, xm = self.alpha, self.x_m
        xs = np.maximum(x, xm)
        tail = xm / (a - 1.0) * (xm / xs) ** (a - 1.0)
        return _scalar_or_array(x, np.where(x >= xm, tail, self.mean - x))

    def _check_second_moment(self):
        if self.alpha <= 2:
            raise SecondMomentInfinite(f"pareto alpha={self.alpha} has E[X^2] = inf")

    def phi_tail_integral(self, x):
        self._check_second_moment()
        x = np.asarray(x, dtype=float)
        a, xm = self.alpha, self.x_m
        xs = np.maximum(x, xm)
        tail = xm**2 / ((a - 1.0) * (a - 2.0)) * (xm / xs) ** (a - 2.0)
        at_xm = xm**2 / ((a - 1.0) * (a - 2.0))
        d = xm - x
        below = at_xm + (self.mean - xm) * d + 0.5 * d * d
        return _scalar_or_array(x, np.where(x >= xm, tail, below))

    def _moment_finite(self, p):
        return p < self.alpha

    def _mgf_finite(self, delta):
        return False


# ---------------------------------------------------------------------------
# quadrature families


@dataclass(frozen=True)
class Beta(OfferModel):
    alpha: float = 2.0
    beta: float = 2.0
    family: str = field(default="beta", init=False)

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError("beta requires alpha, beta > 0")

    support_min = 0.0
    support_max = 1.0

    @property
    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self):
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))

    @property
    def kinks(self):
        return (0.0,)

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta}

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, special.betainc(self.alpha, self.beta, np.clip(x, 0.0, 1.0)))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, special.betainc(self.beta, self.alpha, np.clip(1.0 - x, 0.0, 1.0)))

    def sf_from_top(self, v):
        v = np.asarray(v, dtype=float)
        return _scalar_or_array(v, special.betainc(self.beta, self.alpha, np.clip(v, 0.0, 1.0)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        xc = np.clip(x, 1e-300, 1 - 1e-16)
        logf = (
            (self.alpha - 1) * np.log(xc)
            + (self.beta - 1) * np.log1p(-xc)
            - special.betaln(self.alpha, self.beta)
        )
        return _scalar_or_array(x, np.where(inside, np.exp(logf), 0.0))

    def quantile(self, u):
        u = self._check_u(u)
        return _scalar_or_array(u, special.betaincinv(self.alpha, self.beta, u))

    def phi(self, x):
        if np.ndim(x) == 0:
            return self._phi_quad(float(x))
        return np.array([self._phi_quad(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))

    def phi_tail_integral(self, x):
        if np.ndim(x) == 0:
            return self._tail_quad(float(x))
        return np.array([self._tail_quad(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


@dataclass(frozen=True)
class Gamma(OfferModel):
    alpha: float = 2.0
    eta: float = 1.0
    family: str = field(default="gamma", init=False)

    def __post_init__(self):
        if not (self.alpha > 0 and self.eta > 0):
            raise DomainError("gamma requires alpha, eta > 0")

    support_min = 0.0
    support_max = math.inf

    @property
    def mean(self):
        return self.alpha * self.eta

    @property
    def variance(self):
        return self.alpha * self.eta**2

    @property
    def kinks(self):
        return (0.0,)

    def params(self):
        return {"alpha": self.alpha, "eta": self.eta}

    def tail_scale(self, x):
        return self.eta

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, special.gammainc(self.alpha, np.maximum(x, 0.0) / self.eta))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, special.gammaincc(self.alpha, np.maximum(x, 0.0) / self.eta))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.maximum(x, 1e-300)
        logf = (self.alpha - 1) * np.log(xc / self.eta) - xc / self.eta - special.gammaln(self.alpha) - math.log(self.eta)
        return _scalar_or_array(x, np.where(x > 0, np.exp(logf), 0.0))

    def quantile(self, u):
        u = self._check_u(u)
        return _scalar_or_array(u, self.eta * special.gammaincinv(self.alpha, u))

    phi = Beta.phi
    phi_tail_integral = Beta.phi_tail_integral

    def _mgf_finite(self, delta):
        return delta * self.eta < 1.0


@dataclass(frozen=True)
class Frechet(OfferModel):
    alpha: float = 3.0
    family: str = field(default="frechet", init=False)

    def __post_init__(self):
        if not self.alpha > 1:
            raise TailNotIntegrable("frechet requires alpha > 1 for E[X+] < inf")

    support_min = 0.0
    support_max = math.inf

    @property
    def mean(self):
        return math.gamma(1.0 - 1.0 / self.alpha)

    @property
    def variance(self):
        if self.alpha <= 2:
            return math.inf
        return math.gamma(1.0 - 2.0 / self.alpha) - math.gamma(1.0 - 1.0 / self.alpha) ** 2

    @property
    def kinks(self):
        return (0.0,)

    def params(self):
        return {"alpha": self.alpha}

    def tail_scale(self, x):
        return max(abs(x), 1.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            z = np.maximum(x, 1e-300) ** -self.alpha
        return _scalar_or_array(x, np.where(x > 0, np.exp(-z), 0.0))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            z = np.maximum(x, 1e-300) ** -self.alpha
        return _scalar_or_array(x, np.where(x > 0, -np.expm1(-z), 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a = self.alpha
        xp = np.maximum(x, 1e-300)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.where(x > 0, a * xp ** (-a - 1.0) * np.exp(-(xp**-a)), 0.0)
        return _scalar_or_array(x, np.nan_to_num(out))

    def quantile(self, u):
        u = self._check_u(u)
        return _scalar_or_array(u, (-np.log(u)) ** (-1.0 / self.alpha))

    phi = Beta.phi

    def phi_tail_integral(self, x):
        self._check_second_moment()
        return Beta.phi_tail_integral(self, x)

    def _check_second_moment(self):
        if self.alpha <= 2:
            raise SecondMomentInfinite(f"frechet alpha={self.alpha} has E[X^2] = inf")

    def _moment_finite(self, p):
        return p < self.alpha

    def _mgf_finite(self, delta):
        return False


# ---------------------------------------------------------------------------
# tabulated CDF


class Tabulated(OfferModel):
    """Piecewise-linear CDF through ``(x_i, F_i)``.

    ``F = 0`` left of the first node; a positive first value is an atom there.
    ``M`` is the first node where F reaches 1.  phi and its tail integral are
    exact (piecewise quadratic and cubic).
    """

    family = "tabulated"

    def __init__(self, x, F):
        x = np.asarray(x, dtype=float)
        F = np.asarray(F, dtype=float)
        if x.ndim != 1 or x.shape != F.shape or x.size < 2:
            raise DomainError("tabulated CDF needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(x) <= 0):
            raise DomainError("tabulated x must be strictly increasing")
        if np.any(np.diff(F) < 0) or F[0] < 0 or F[-1] > 1:
            raise DomainError("tabulated F must be nondecreasing in [0, 1]")
        if F[-1] != 1.0:
            raise DomainError("tabulated F must reach 1 at the last grid point")
        last = int(np.argmax(F >= 1.0))
        x, F = x[: last + 1].copy(), F[: last + 1].copy()
        if x.size < 2:
            raise DomainError("tabulated CDF is degenerate")
        x.flags.writeable = False
        F.flags.writeable = False
        self.x, self.F = x, F
        self.support_min = float(x[0])
        self.support_max = float(x[-1])
        self.has_density = bool(F[0] == 0.0)

        S = 1.0 - F
        h = np.diff(x)
        seg_phi = 0.5 * h * (S[:-1] + S[1:])
        Phi = np.zeros_like(x)
        Phi[:-1] = np.cumsum(seg_phi[::-1])[::-1]
        seg_i2 = Phi[1:] * h + S[1:] * h * h / 2.0 + (S[:-1] - S[1:]) * h * h / 6.0
        I2 = np.zeros_like(x)
        I2[:-1] = np.cumsum(seg_i2[::-1])[::-1]
        self._S, self._h, self._Phi, self._I2 = S, h, Phi, I2

        dF = np.diff(F)
        mid = 0.5 * (x[:-1] + x[1:])
        self.mean = float(F[0] * x[0] + np.sum(dF * mid))
        second = float(F[0] * x[0] ** 2 + np.sum(dF * (x[:-1] ** 2 + x[:-1] * x[1:] + x[1:] ** 2) / 3.0))
        self.variance = max(second - self.mean**2, 0.0)

    def __repr__(self):
        return f"Tabulated(n={self.x.size}, x=[{self.x[0]:g}, {self.x[-1]:g}])"

    def __eq__(self, other):
        return isinstance(other, Tabulated) and np.array_equal(self.x, other.x) and np.array_equal(self.F, other.F)

    def __hash__(self):
        return hash((self.x.tobytes(), self.F.tobytes()))

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        """Read a two-column ``x,F`` CSV with a header row."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise DomainError(f"{path}: empty file")
        header = [c.strip() for c in rows[0]]
        if header[:2] != ["x", "F"]:
            raise DomainError(f"{path}: header must be 'x,F'")
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
        return cls(data[:, 0], data[:, 1])

    @property
    def kinks(self):
        return tuple(float(v) for v in self.x)

    def params(self):
        return {"n": int(self.x.size), "x_min": self.support_min, "x_max": self.support_max}

    def tail_scale(self, x):
        return 1.0

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.interp(xa, self.x, self.F, left=0.0, right=1.0)
        out = np.where(xa < self.x[0], 0.0, out)
        return _scalar_or_array(x, out)

    def sf(self, x):
        return _scalar_or_array(x, 1.0 - np.asarray(self.cdf(x)))

    def pdf(self, x):
        if not self.has_density:
            raise NoDensity("tabulated CDF has an atom at its first grid point")
        xa = np.asarray(x, dtype=float)
        slope = np.diff(self.F) / self._h
        i = np.clip(np.searchsorted(self.x, xa, side="right") - 1, 0, slope.size - 1)
        inside = (xa >= self.x[0]) & (xa < self.x[-1])
        return _scalar_or_array(x, np.where(inside, slope[i], 0.0))

    def quantile(self, u):
        u = self._check_u(u)
        j = np.searchsorted(self.F, u, side="left")
        j = np.clip(j, 1, self.x.size - 1)
        F0, F1 = self.F[j - 1], self.F[j]
        x0, x1 = self.x[j - 1], self.x[j]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(F1 > F0, (u - F0) / (F1 - F0), 1.0)
        out = np.where(u <= self.F[0], self.x[0], x0 + frac * (x1 - x0))
        return _scalar_or_array(u, out)

    def _segment(self, xa):
        i = np.clip(np.searchsorted(self.x, xa, side="right") - 1, 0, self._h.size - 1)
        tau = self.x[i + 1] - xa
        return i, tau

    def phi(self, x):
        xa = np.asarray(x, dtype=float)
        i, tau = self._segment(xa)
        S0, S1, h = self._S[i], self._S[i + 1], self._h[i]
        Sx = S1 + (S0 - S1) * tau / h
        inside = self._Phi[i + 1] + 0.5 * tau * (Sx + S1)
        below = self._Phi[0] + (self.x[0] - xa)
        out = np.where(xa < self.x[0], below, np.where(xa >= self.x[-1], 0.0, inside))
        return _scalar_or_array(x, out)

    def phi_tail_integral(self, x):
        xa = np.asarray(x, dtype=float)
        i, tau = self._segment(xa)
        S0, S1, h = self._S[i], self._S[i + 1], self._h[i]
        inside = self._I2[i + 1] + self._Phi[i + 1] * tau + S1 * tau**2 / 2.0 + (S0 - S1) * tau**3 / (6.0 * h)
        d = self.x[0] - xa
        below = self._I2[0] + self._Phi[0] * d + 0.5 * d * d
        out = np.where(xa < self.x[0], below, np.where(xa >= self.x[-1], 0.0, inside))
        return _scalar_or_array(x, out)


# ---------------------------------------------------------------------------
# residual laws


@dataclass(frozen=True)
class PointMass(Distribution):
    value: float = 0.0
    has_density: bool = field(default=False, init=False)

    @property
    def mean(self):
        return self.value

    @property
    def variance(self):
        return 0.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.where(x >= self.value, 1.0, 0.0))

    def quantile(self, u):
        u = self._check_u(u)
        return _scalar_or_array(u, np.full(u.shape, self.value))


@dataclass(frozen=True)
class ResidualSpec:
    """Law F0 of the salvage price X0 paid when the deadline passes unsold."""

    kind: str
    model: Distribution

    @classmethod
    def zero(cls) -> "ResidualSpec":
        return cls("zero", PointMass(0.0))

    @classmethod
    def same_as(cls, offer: OfferModel) -> "ResidualSpec":
        return cls("same", offer)

    @classmethod
    def custom(cls, model: Distribution) -> "ResidualSpec":
        return cls("custom", model)

    @classmethod
    def point(cls, mu0: float) -> "ResidualSpec":
        """Deterministic salvage value ``mu0``."""
        return cls("custom", PointMass(float(mu0)))

    @property
    def mean(self) -> float:
        return float(self.model.mean)

    @property
    def variance(self) -> float:
        return float(self.model.variance)

    @property
    def has_density(self) -> bool:
        return bool(self.model.has_density)

    def cdf(self, x):
        return self.model.cdf(x)

    def pdf(self, x):
        return self.model.pdf(x)

    def quantile(self, u):
        return self.model.quantile(u)


FAMILIES = {
    "uniform": Uniform,
    "exponential": Exponential,
    "pareto": Pareto,
    "beta": Beta,
    "gamma": Gamma,
    "frechet": Frechet,
}

WORKED_FAMILIES = ("uniform", "exponential", "pareto")


def make_offer(family: str, **params) -> OfferModel:
    """Build a built-in offer model from its family name and parameters."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    return cls(**params)
