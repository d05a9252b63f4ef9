"""Law of the realized sale price S_t under the optimal policy.

With ``K(x) = int_mu0^x dw / phi(w)^2`` and ``m = mu(t)`` the CDF is

    G_t(x) = phi(m) F0(x) / phi(mu0)                                   x < mu0
    G_t(x) = phi(m) [F0(x)/phi(mu0) + 1/phi(x) - 1/phi(mu0) + (F(x)-1) K(x)]   mu0 <= x < m
    G_t(x) = phi(m) [F0(x)/phi(mu0) + 1/phi(m) - 1/phi(mu0) + (F(x)-1) K(m)]   x >= m

and the variance is ``phi(m) [Var X0 / phi(mu0) + 2 V(m)]`` with
``V(x) = int_mu0^x I2(w) / phi(w)^2 dw``, ``I2(w) = int_w^inf phi``.

``method="closed"`` uses the exact antiderivatives for uniform, exponential
and Pareto offers, ``"generic"`` the numeric panel table, ``"auto"`` the
closed route when one exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import ResidualSpec
from .errors import DomainError, NoDensity, SecondMomentInfinite
from .io import write_csv, write_json
from .policy import PolicyCurve


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _check_pair(curve: PolicyCurve, residual: ResidualSpec) -> None:
    if abs(residual.mean - curve.mu0) > 1e-12 * max(1.0, abs(curve.mu0)):
        raise DomainError(f"residual mean {residual.mean} differs from the policy's mu0 {curve.mu0}")


def _setup(curve: PolicyCurve, t: float, method: str):
    m = curve.mu(float(t), method)
    phi_m = float(curve.offer.phi(m))
    phi_0 = float(curve.offer.phi(curve.mu0))
    return curve.integrals(method), m, phi_m, phi_0


def price_cdf(curve: PolicyCurve, residual: ResidualSpec, t: float, x, method: str = "auto"):
    """G_t(x) = P(S_t <= x)."""
    _check_pair(curve, residual)
    ints, m, phi_m, phi_0 = _setup(curve, t, method)
    xa = np.asarray(x, dtype=float)
    mu0 = curve.mu0
    F0 = np.asarray(residual.cdf(xa), dtype=float)
    F = np.asarray(curve.offer.cdf(xa), dtype=float)
    xc = np.clip(xa, mu0, m)
    Kx = np.asarray(ints.K(xc), dtype=float) if m > mu0 else np.zeros_like(xa)
    inv_phi = 1.0 / np.asarray(curve.offer.phi(xc), dtype=float)
    upper = F0 / phi_0 + inv_phi - 1.0 / phi_0 + (F - 1.0) * Kx
    out = phi_m * np.where(xa < mu0, F0 / phi_0, upper)
    return _ret(x, np.clip(out, 0.0, 1.0))


def price_pdf(curve: PolicyCurve, residual: ResidualSpec, t: float, x, method: str = "auto"):
    """g_t(x), defined when both the offer and residual laws have densities."""
    _check_pair(curve, residual)
    ints, m, phi_m, phi_0 = _setup(curve, t, method)
    xa = np.asarray(x, dtype=float)
    mu0 = curve.mu0
    f0 = np.asarray(residual.pdf(xa), dtype=float)
    f = np.asarray(curve.offer.pdf(xa), dtype=float)
    xc = np.clip(xa, mu0, m)
    Kx = np.asarray(ints.K(xc), dtype=float) if m > mu0 else np.zeros_like(xa)
    out = phi_m * (f0 / phi_0 + np.where(xa >= mu0, f * Kx, 0.0))
    return _ret(x, out)


def price_mean(curve: PolicyCurve, t: float, method: str = "auto") -> float:
    """E[S_t], which equals the threshold mu(t)."""
    return float(curve.mu(float(t), method))


def price_var(curve: PolicyCurve, residual: ResidualSpec, t: float, method: str = "auto") -> float:
    """Var[S_t]; needs finite second moments of X and X0."""
    _check_pair(curve, residual)
    if not math.isfinite(residual.variance):
        raise SecondMomentInfinite("residual law has infinite variance")
    curve.offer._check_second_moment()
    ints, m, phi_m, phi_0 = _setup(curve, t, method)
    V = float(ints.V(m)) if m > curve.mu0 else 0.0
    return phi_m * (residual.variance / phi_0 + 2.0 * V)


@dataclass(frozen=True)
class PriceSummary:
    t: float
    mean: float
    var: float | None

    def as_dict(self):
        return {"t": self.t, "mean": self.mean, "var": self.var}


def price_table(curve, residual, t, x_grid, method: str = "auto") -> np.ndarray:
    """Rows ``x, G, g``; ``g`` is NaN when a density does not exist."""
    x = np.asarray(x_grid, dtype=float)
    G = price_cdf(curve, residual, t, x, method)
    try:
        g = price_pdf(curve, residual, t, x, method)
    except NoDensity:
        g = np.full(x.shape, np.nan)
    return np.column_stack([x, G, g])


def export_price(curve, residual, t, x_grid, csv_path, json_path=None, method: str = "auto") -> PriceSummary:
    write_csv(csv_path, ["x", "G", "g"], price_table(curve, residual, t, x_grid, method))
    try:
        var = price_var(curve, residual, t, method)
    except SecondMomentInfinite:
        var = None
    summary = PriceSummary(float(t), price_mean(curve, t, method), var)
    if json_path is not None:
        write_json(json_path, summary.as_dict())
    return summary
