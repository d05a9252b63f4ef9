"""Law of the time to sale T_t.

Remaining-time threshold ``mu(t - r)`` falls as the clock runs, and

    P(T_t > r) = phi(mu(t)) / phi(mu(t - r)),   0 <= r < t,

so T_t has an atom ``phi(mu(t)) / phi(mu0)`` at the deadline.  Moments are

    E[T_t]   = phi(mu(t)) K(mu(t)) / lam
    Var[T_t] = (2 phi(mu(t)) J(mu(t)) - (phi(mu(t)) K(mu(t)))^2) / lam^2

with ``K = int_mu0 dw/phi^2`` and ``J = int_mu0 K/phi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import write_csv, write_json
from .policy import PolicyCurve


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


def stop_cdf(curve: PolicyCurve, t: float, r, method: str = "auto"):
    """H_t(r) = P(T_t <= r); equals 1 for r >= t (the atom included)."""
    t = float(t)
    ra = np.asarray(r, dtype=float)
    inside = (ra >= 0) & (ra < t)
    rem = np.where(inside, t - ra, t)
    phi_t = float(curve.offer.phi(curve.mu(t, method)))
    phi_r = np.asarray(curve.offer.phi(curve.mu(rem, method)), dtype=float)
    out = np.where(ra < 0, 0.0, np.where(ra >= t, 1.0, 1.0 - phi_t / phi_r))
    return _ret(r, out)


def atom_prob(curve: PolicyCurve, t: float, method: str = "auto") -> float:
    """P(T_t = t): no offer clears the threshold before the deadline."""
    return float(curve.offer.phi(curve.mu(float(t), method))) / float(curve.offer.phi(curve.mu0))


def _phik(curve, t, method):
    m = curve.mu(float(t), method)
    if m <= curve.mu0:
        return m, 0.0, 0.0, None
    ints = curve.integrals(method)
    phi_m = float(curve.offer.phi(m))
    return m, phi_m, float(ints.K(m)), ints


def stop_mean(curve: PolicyCurve, t: float, method: str = "auto") -> float:
    _, phi_m, K, _ = _phik(curve, t, method)
    return phi_m * K / curve.lam


def stop_var(curve: PolicyCurve, t: float, method: str = "auto") -> float:
    m, phi_m, K, ints = _phik(curve, t, method)
    if ints is None:
        return 0.0
    J = float(ints.J(m))
    return max(2.0 * phi_m * J - (phi_m * K) ** 2, 0.0) / curve.lam**2


def that_cdf(curve: PolicyCurve, t: float, s, method: str = "auto"):
    """CDF of the fraction T_t / t of the marketing period used."""
    t = float(t)
    if not t > 0:
        raise ValueError("normalized time to sale needs t > 0")
    sa = np.asarray(s, dtype=float)
    return _ret(s, np.asarray(stop_cdf(curve, t, sa * t, method)))


@dataclass(frozen=True)
class StopLaw:
    t: float
    atom: float
    mean: float
    var: float

    def as_dict(self):
        return {"t": self.t, "atom": self.atom, "mean": self.mean, "var": self.var}


def stop_law(curve: PolicyCurve, t: float, method: str = "auto") -> StopLaw:
    return StopLaw(
        float(t), atom_prob(curve, t, method), stop_mean(curve, t, method), stop_var(curve, t, method)
    )


def export_stop(curve, t, r_grid, csv_path, json_path=None, method: str = "auto") -> StopLaw:
    r = np.asarray(r_grid, dtype=float)
    write_csv(csv_path, ["r", "H"], np.column_stack([r, stop_cdf(curve, t, r, method)]))
    law = stop_law(curve, t, method)
    if json_path is not None:
        write_json(json_path, law.as_dict())
    return law
