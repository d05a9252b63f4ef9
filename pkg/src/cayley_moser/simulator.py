"""Monte Carlo replay of the bidding process under the optimal policy.

Offers arrive after exponential(lam) gaps.  With ``r`` time left an offer
``X`` is accepted when ``X >= mu(r)``; if the deadline passes first the item
goes for a salvage draw from the residual law and the sale time is ``t``.

All runs advance together as numpy arrays.  Each run draws from its own
Philox substream keyed by ``(seed, run, step)``, so output is identical for
any chunking or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .distributions import OfferModel, ResidualSpec
from .errors import DomainError, EmptyBatch
from .io import write_csv, write_json
from .policy import PolicyCurve
from .rng import STREAM_ARRIVAL, STREAM_RESIDUAL, split_seed, uniform_pair

CHUNK = 8192
POLICY_NODES = 4096
POLICY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SimConfig:
    offer: OfferModel
    residual: ResidualSpec
    policy: PolicyCurve
    t: float
    n_runs: int
    seed: int
    threads: int = 1

    def __post_init__(self):
        if not self.n_runs >= 1:
            raise DomainError("n_runs must be >= 1")
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise DomainError("t must be finite and >= 0")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")
        split_seed(self.seed)
        if self.policy.offer != self.offer:
            raise DomainError("policy was solved for a different offer model")
        if abs(self.residual.mean - self.policy.mu0) > 1e-12 * max(1.0, abs(self.policy.mu0)):
            raise DomainError("policy mu0 differs from the residual mean")

    @property
    def lam(self) -> float:
        return self.policy.lam


@dataclass(frozen=True)
class SimBatch:
    prices: np.ndarray
    times: np.ndarray
    hit_deadline: np.ndarray
    t: float

    @property
    def n(self) -> int:
        return int(self.prices.size)

    @property
    def atom_count(self) -> int:
        return int(np.count_nonzero(self.hit_deadline))

    def to_csv(self, path) -> None:
        rows = zip(range(self.n), self.prices, self.times, self.hit_deadline.astype(int))
        write_csv(path, ["run", "S", "T", "hit_deadline"], rows)


def threshold_function(policy: PolicyCurve, t: float) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized ``r -> mu(r)`` on ``[0, t]``.

    Closed-form policies are evaluated directly.  Otherwise a monotone cubic
    interpolant through a log-spaced grid is used, refined until its error at
    the cell midpoints is below ``POLICY_TOL``.
    """
    if policy.is_closed or t <= 0:
        return policy.mu
    n = POLICY_NODES - 1
    while True:
        nodes = np.concatenate([[0.0], np.geomspace(t * 1e-8, t, n)])
        vals = policy.mu(nodes)
        interp = PchipInterpolator(nodes, vals)
        mids = 0.5 * (nodes[1:] + nodes[:-1])
        err = float(np.max(np.abs(interp(mids) - policy.mu(mids))))
        if err <= POLICY_TOL or n >= 2**20:
            break
        n *= 2
    hi = float(nodes[-1])

    def f(r):
        return interp(np.minimum(r, hi))

    return f


def _simulate_runs(config: SimConfig, runs: np.ndarray, mu: Callable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t, lam, seed = float(config.t), config.lam, config.seed
    n = runs.size
    prices = np.empty(n)
    times = np.empty(n)
    hit = np.zeros(n, dtype=bool)
    elapsed = np.zeros(n)
    active = np.arange(n)
    step = 0
    while active.size:
        u_gap, u_offer = uniform_pair(seed, runs[active], step, STREAM_ARRIVAL)
        arrival = elapsed[active] - np.log1p(-u_gap) / lam
        late = arrival >= t
        if np.any(late):
            idx = active[late]
            u_res, _ = uniform_pair(seed, runs[idx], 0, STREAM_RESIDUAL)
            prices[idx] = config.residual.quantile(u_res)
            times[idx] = t
            hit[idx] = True
        keep = ~late
        idx = active[keep]
        arr = arrival[keep]
        if idx.size:
            x = np.asarray(config.offer.quantile(u_offer[keep]), dtype=float)
            accept = x >= np.asarray(mu(t - arr), dtype=float)
            prices[idx[accept]] = x[accept]
            times[idx[accept]] = arr[accept]
            elapsed[idx] = arr
            active = idx[~accept]
        else:
            active = idx
        step += 1
    return prices, times, hit


def simulate_batch(config: SimConfig) -> SimBatch:
    mu = threshold_function(config.policy, config.t)
    runs = np.arange(config.n_runs, dtype=np.uint64)
    chunks = [runs[i : i + CHUNK] for i in range(0, runs.size, CHUNK)]
    if config.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            parts = list(pool.map(lambda c: _simulate_runs(config, c, mu), chunks))
    else:
        parts = [_simulate_runs(config, c, mu) for c in chunks]
    prices = np.concatenate([p[0] for p in parts])
    times = np.concatenate([p[1] for p in parts])
    hit = np.concatenate([p[2] for p in parts])
    return SimBatch(prices, times, hit, float(config.t))


def simulate_run(config: SimConfig, run: int) -> tuple[float, float]:
    """Replay a single run; identical to entry ``run`` of :func:`simulate_batch`."""
    if not 0 <= run < 2**64:
        raise DomainError("run index must be a 64-bit unsigned integer")
    mu = threshold_function(config.policy, config.t)
    p, t, _ = _simulate_runs(config, np.array([run], dtype=np.uint64), mu)
    return float(p[0]), float(t[0])


@dataclass(frozen=True)
class SimSummary:
    n: int
    price_mean: float
    price_var: float
    price_mean_se: float
    price_var_se: float
    time_mean: float
    time_var: float
    time_mean_se: float
    time_var_se: float
    atom_freq: float
    atom_se: float
    price_ecdf: Callable = field(repr=False, compare=False)
    time_ecdf: Callable = field(repr=False, compare=False)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "price_mean": self.price_mean,
            "price_var": self.price_var,
            "price_mean_se": self.price_mean_se,
            "price_var_se": self.price_var_se,
            "time_mean": self.time_mean,
            "time_var": self.time_var,
            "time_mean_se": self.time_mean_se,
            "time_var_se": self.time_var_se,
            "atom_freq": self.atom_freq,
            "atom_se": self.atom_se,
        }


def ecdf(samples: np.ndarray) -> Callable:
    xs = np.sort(np.asarray(samples, dtype=float))

    def F(x):
        out = np.searchsorted(xs, np.asarray(x, dtype=float), side="right") / xs.size
        return float(out) if np.ndim(x) == 0 else out

    return F


def _moments(x: np.ndarray) -> tuple[float, float, float, float]:
    n = x.size
    mean = float(np.mean(x))
    if n < 2:
        return mean, 0.0, 0.0, 0.0
    d = x - mean
    var = float(np.sum(d * d) / (n - 1))
    m4 = float(np.mean(d**4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / n)
    return mean, var, math.sqrt(var / n), var_se


def summarize(batch: SimBatch) -> SimSummary:
    if batch.n == 0:
        raise EmptyBatch("cannot summarize an empty batch")
    pm, pv, pse, pvse = _moments(batch.prices)
    tm, tv, tse, tvse = _moments(batch.times)
    q = batch.atom_count / batch.n
    return SimSummary(
        n=batch.n,
        price_mean=pm,
        price_var=pv,
        price_mean_se=pse,
        price_var_se=pvse,
        time_mean=tm,
        time_var=tv,
        time_mean_se=tse,
        time_var_se=tvse,
        atom_freq=q,
        atom_se=math.sqrt(q * (1.0 - q) / batch.n),
        price_ecdf=ecdf(batch.prices),
        time_ecdf=ecdf(batch.times),
    )


def export_batch(batch: SimBatch, csv_path, json_path=None) -> SimSummary:
    batch.to_csv(csv_path)
    summary = summarize(batch)
    if json_path is not None:
        write_json(json_path, summary.as_dict())
    return summary
