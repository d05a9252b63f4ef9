"""Goodness-of-fit and cross-path checks with machine-readable reports.

Simulated laws are compared with the analytic CDFs through the sup distance
to the empirical CDF, judged against the Dvoretzky-Kiefer-Wolfowitz envelope
``sqrt(log(2 / alpha) / (2 n))``.  A point mass (the deadline atom of the
sale time) is taken out of the sup and tested on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .distributions import ResidualSpec, make_offer
from .errors import DomainError, SecondMomentInfinite, TooFewSamples, UnknownFigure
from .io import write_csv, write_json
from .plotting import overlay_svg
from .policy import PolicyCurve
from .price import price_cdf, price_pdf, price_var
from .simulator import SimConfig, simulate_batch, summarize
from .stoptime import atom_prob, stop_cdf, stop_mean, stop_var

DKW_ALPHA = 1e-3
MIN_SAMPLES = 100
FIGURE_MIN_N = 10_000


def dkw_threshold(n: int, alpha: float = DKW_ALPHA) -> float:
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


@dataclass(frozen=True)
class Distance:
    statistic: float
    n: int
    atom_freq: float | None = None
    atom_mass: float | None = None
    atom_se: float | None = None

    @property
    def atom_diff(self) -> float | None:
        if self.atom_mass is None:
            return None
        return abs(self.atom_freq - self.atom_mass)


def cdf_distance(samples, cdf: Callable, atom: tuple[float, float] | None = None) -> Distance:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``.

    With ``atom = (location, mass)`` the sup runs over samples other than the
    atom location, and the atom frequency is reported next to its mass.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {n}")
    freq = mass = se = None
    if atom is not None:
        loc, mass = float(atom[0]), float(atom[1])
        at = x == loc
        freq = float(np.count_nonzero(at)) / n
        se = math.sqrt(max(mass * (1.0 - mass), 0.0) / n)
        pts = x[~at]
    else:
        pts = x
    if pts.size == 0:
        return Distance(0.0, n, freq, mass, se)
    F = np.asarray(cdf(pts), dtype=float)
    # empirical CDF just after and just before each sample point
    upper = np.searchsorted(x, pts, side="right") / n
    lower = np.searchsorted(x, pts, side="left") / n
    stat = float(max(np.max(np.abs(upper - F)), np.max(np.abs(F - lower))))
    return Distance(stat, n, freq, mass, se)


def _check(name, statistic, threshold, **extra) -> dict:
    out = {"name": name, "statistic": statistic, "threshold": threshold}
    out["pass"] = bool(statistic is None or statistic <= threshold)
    out.update(extra)
    return out


def report_passed(report: dict) -> bool:
    return all(c["pass"] for c in report["checks"])


# ---------------------------------------------------------------------------
# closed-form against generic numerics

ORACLE_FAMILIES = ("uniform", "exponential", "pareto")


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def _abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def oracle_suite(family: str, params: dict, lam: float, t_grid) -> dict:
    """Compare every closed-form quantity with its numeric counterpart.

    The residual law is taken equal to the offer law.
    """
    if family not in ORACLE_FAMILIES:
        raise DomainError(f"oracle suite covers {ORACLE_FAMILIES}, not {family!r}")
    offer = make_offer(family, **params)
    residual = ResidualSpec.same_as(offer)
    curve = PolicyCurve(offer, offer.mean, lam)
    t_grid = [float(t) for t in np.atleast_1d(t_grid)]
    checks = []
    for t in t_grid:
        tag = f"t={t:g}"
        m = curve.mu(t, "closed")
        checks.append(_check(f"mu_closed_vs_psi_{tag}", _rel(curve.mu(t, "generic"), m), 1e-8))
        checks.append(_check(f"mu_closed_vs_ode_{tag}", _abs(curve.mu_ode(t), m), 1e-7))
        checks.append(_check(f"psi_identity_{tag}", abs(curve.psi(m, "generic") - lam * t) / max(1.0, lam * t), 1e-8))
        hi = m + 4.0 * math.sqrt(offer.variance) if math.isfinite(offer.variance) else 4.0 * m
        xs = np.linspace(offer.support_min, min(hi, offer.support_max), 401)
        checks.append(
            _check(
                f"price_cdf_{tag}",
                _abs(price_cdf(curve, residual, t, xs, "closed"), price_cdf(curve, residual, t, xs, "generic")),
                1e-8,
            )
        )
        g_c = price_pdf(curve, residual, t, xs, "closed")
        g_g = price_pdf(curve, residual, t, xs, "generic")
        checks.append(_check(f"price_pdf_{tag}", _abs(g_c, g_g) / max(float(np.max(np.abs(g_c))), 1e-300), 1e-6))
        try:
            v = _rel(price_var(curve, residual, t, "generic"), price_var(curve, residual, t, "closed"))
            checks.append(_check(f"price_var_{tag}", v, 1e-6))
        except SecondMomentInfinite:
            checks.append(_check(f"price_var_{tag}", None, 1e-6, skipped="SecondMomentInfinite"))
        rs = np.linspace(0.0, t, 201)[:-1]
        checks.append(_check(f"stop_cdf_{tag}", _abs(stop_cdf(curve, t, rs, "closed"), stop_cdf(curve, t, rs, "generic")), 1e-8))
        checks.append(_check(f"stop_mean_{tag}", _rel(stop_mean(curve, t, "generic"), stop_mean(curve, t, "closed")), 1e-8))
        checks.append(_check(f"stop_var_{tag}", _rel(stop_var(curve, t, "generic"), stop_var(curve, t, "closed")), 1e-8))
    return {
        "figure": None,
        "family": family,
        "params": offer.params(),
        "lambda": lam,
        "t": t_grid,
        "n": 0,
        "seed": None,
        "checks": checks,
    }


# ---------------------------------------------------------------------------
# figure replication


@dataclass(frozen=True)
class FigureSetup:
    family: str
    params: dict
    quantity: str  # "price" or "time"
    t: tuple[float, ...]
    lam: float = 1.0


FIGURES = {
    "f2": FigureSetup("uniform", {"a": 1.0, "b": 3.0}, "price", (2.0, 10.0)),
    "f3": FigureSetup("exponential", {"eta": 2.0}, "price", (2.0, 10.0)),
    "f4": FigureSetup("pareto", {"x_m": 1.0, "alpha": 3.0}, "price", (2.0, 10.0)),
    "f5": FigureSetup("uniform", {"a": 1.0, "b": 3.0}, "time", (10.0,)),
    "f6": FigureSetup("exponential", {"eta": 2.0}, "time", (10.0,)),
    "f7": FigureSetup("pareto", {"x_m": 1.0, "alpha": 1.5}, "time", (30.0,)),
}


def _plot_range(offer, samples) -> tuple[float, float]:
    lo = float(min(offer.support_min, np.min(samples)))
    hi = float(np.quantile(samples, 0.995))
    if math.isfinite(offer.support_max):
        hi = offer.support_max
    return lo, hi


def figure_replication(figure: str, n: int, seed: int, out_dir=None, threads: int = 1) -> dict:
    """Simulate a figure's setup, compare with the analytic law, emit plot data.

    Returns the report dict; when ``out_dir`` is given also writes
    ``<figure>_report.json``, per-t ``<figure>_t<t>.csv`` (``x,analytic,empirical``
    CDF values), density overlays for sale-price figures, and ``<figure>.svg``.
    """
    try:
        setup = FIGURES[figure]
    except KeyError:
        raise UnknownFigure(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}") from None
    if n < FIGURE_MIN_N:
        raise DomainError(f"figure replication needs n >= {FIGURE_MIN_N}")
    offer = make_offer(setup.family, **setup.params)
    residual = ResidualSpec.same_as(offer)
    curve = PolicyCurve(offer, offer.mean, setup.lam)
    thr = dkw_threshold(n)
    checks, panels, tables = [], [], {}
    for t in setup.t:
        tag = f"t={t:g}"
        batch = simulate_batch(SimConfig(offer, residual, curve, t, n, seed, threads))
        summ = summarize(batch)
        if setup.quantity == "price":
            d = cdf_distance(batch.prices, lambda x: price_cdf(curve, residual, t, x))
            checks.append(_check(f"price_cdf_sup_{tag}", d.statistic, thr))
            z = abs(summ.price_mean - curve.mu(t)) / summ.price_mean_se
            checks.append(_check(f"price_mean_z_{tag}", z, 4.0))
            try:
                v = price_var(curve, residual, t)
                z = abs(summ.price_var - v) / summ.price_var_se
                checks.append(_check(f"price_var_z_{tag}", z, 5.0))
            except SecondMomentInfinite:
                checks.append(_check(f"price_var_z_{tag}", None, 5.0, skipped="SecondMomentInfinite"))
            lo, hi = _plot_range(offer, batch.prices)
            xs = np.linspace(lo, hi, 401)
            cdf_rows = np.column_stack([xs, price_cdf(curve, residual, t, xs), summ.price_ecdf(xs)])
            edges = np.linspace(lo, hi, 81)
            counts, _ = np.histogram(batch.prices, bins=edges)
            mids = 0.5 * (edges[1:] + edges[:-1])
            dens = counts / (n * np.diff(edges))
            den_rows = np.column_stack([mids, price_pdf(curve, residual, t, mids), dens])
            tables[f"t{t:g}"] = cdf_rows
            tables[f"t{t:g}_density"] = den_rows
            panels.append({"x": mids, "analytic": den_rows[:, 1], "empirical": dens, "kind": "density", "label": f"sale price, t={t:g}", "xlabel": "price"})
        else:
            mass = atom_prob(curve, t)
            d = cdf_distance(batch.times, lambda r: stop_cdf(curve, t, r), atom=(t, mass))
            checks.append(_check(f"time_cdf_sup_{tag}", d.statistic, thr))
            checks.append(_check(f"time_atom_z_{tag}", d.atom_diff / d.atom_se, 4.0))
            z = abs(summ.time_mean - stop_mean(curve, t)) / summ.time_mean_se
            checks.append(_check(f"time_mean_z_{tag}", z, 4.0))
            z = abs(summ.time_var - stop_var(curve, t)) / summ.time_var_se
            checks.append(_check(f"time_var_z_{tag}", z, 5.0))
            rs = np.linspace(0.0, t, 401)
            an = np.where(rs < t, stop_cdf(curve, t, rs), 1.0)
            rows = np.column_stack([rs, an, summ.time_ecdf(rs)])
            tables[f"t{t:g}"] = rows
            panels.append({"x": rs, "analytic": rows[:, 1], "empirical": rows[:, 2], "kind": "cdf", "label": f"time to sale, t={t:g}", "xlabel": "time"})
    report = {
        "figure": figure,
        "family": setup.family,
        "params": offer.params(),
        "lambda": setup.lam,
        "t": list(setup.t),
        "n": n,
        "seed": seed,
        "checks": checks,
    }
    if out_dir is not None:
        out = Path(out_dir)
        write_json(out / f"{figure}_report.json", report)
        for key, rows in tables.items():
            write_csv(out / f"{figure}_{key}.csv", ["x", "analytic", "empirical"], rows)
        overlay_svg(out / f"{figure}.svg", panels, title=f"{figure}: {setup.family} {offer.params()}")
    return report
