"""Panel tables for the running integrals of 1/phi.

For a fixed offer model and starting point ``mu0`` the table holds, on a
growing sequence of panels ``[x_i, x_{i+1}]``, Chebyshev interpolants of

    a = 1/phi,  b = 1/phi^2,  c = K/phi,  d = I2/phi^2

where ``K(x) = int_mu0^x b``, ``I2(x) = int_x^inf phi``.  Their exact
antiderivatives give

    Psi(x) = int a,  K(x) = int b,  J(x) = int c,  V(x) = int d

anywhere on the covered range, and ``Psi`` can be inverted panel-wise.

Panel widths follow the local scale ``phi(x) / (1 - F(x))`` and are capped at
half the remaining distance to a finite support maximum, so panels shrink
geometrically where ``1/phi`` blows up.  Panels split in two whenever the
trailing Chebyshev coefficients have not decayed.
"""

from __future__ import annotations

import math
import threading

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import DomainError

DEGREE = 24
COEF_TOL = 1e-11
# splitting stops once halving no longer shrinks a tail that is already this small
NOISE_TOL = 1e-8
MAX_SPLIT_DEPTH = 10
# the table stops this many ulps short of a finite M; closer panels would
# have nodes only a few representable numbers apart
RESOLUTION_ULPS = 2.0**17
# number of trailing coefficients inspected for convergence
TAIL = 3

_NODES = np.cos(np.pi * (np.arange(DEGREE + 1) + 0.5) / (DEGREE + 1))


def _fit(values: np.ndarray, s: np.ndarray = _NODES) -> np.ndarray:
    """Chebyshev interpolation coefficients from samples at ``s``."""
    return C.chebfit(s, values, DEGREE)


def _tail(coefs: np.ndarray) -> float:
    scale = np.max(np.abs(coefs))
    if not np.isfinite(scale) or scale == 0:
        return math.inf if not np.isfinite(scale) else 0.0
    return float(np.max(np.abs(coefs[-TAIL:])) / scale)


def chebval_rows(s: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    """Evaluate row ``i`` of ``coefs`` at ``s[i]`` (vectorized Clenshaw)."""
    b1 = np.zeros_like(s)
    b2 = np.zeros_like(s)
    two_s = 2.0 * s
    for k in range(coefs.shape[1] - 1, 0, -1):
        b1, b2 = coefs[:, k] + two_s * b1 - b2, b1
    return coefs[:, 0] + s * b1 - b2


class _Panel:
    __slots__ = ("lo", "hi", "mid", "half", "ia", "ib", "ic", "id", "a_nodes", "s_nodes", "psi0", "k0", "j0", "v0")

    def __init__(self, lo, hi):
        self.lo, self.hi = lo, hi
        self.mid = 0.5 * (lo + hi)
        self.half = 0.5 * (hi - lo)
        self.id = None

    def x_nodes(self):
        return self.mid + self.half * self.s_nodes


class PanelTable:
    """Lazily extended integral table for ``(offer, mu0)``.

    The table only grows; every value ever returned is computed from panels
    that never change afterwards, so results do not depend on the order of
    queries.  Access is serialized with a re-entrant lock.
    """

    def __init__(self, offer, mu0: float):
        self.offer = offer
        self.mu0 = float(mu0)
        self.M = float(offer.support_max)
        if not self.mu0 < self.M:
            raise DomainError("mu0 must lie below the support maximum")
        self._lock = threading.RLock()
        self._panels: list[_Panel] = []
        self._edge = self.mu0
        self._psi = 0.0
        self._K = 0.0
        self._J = 0.0
        self._exhausted = False
        self._kinks = np.array(sorted(float(k) for k in offer.kinks if k > self.mu0))
        self._cache = None
        self._v_ready = 0
        self._V = 0.0

    # -- construction ---------------------------------------------------------
    def _step(self, x: float) -> float:
        phi = float(self.offer.phi(x))
        sf = float(self.offer.sf(x))
        h = phi / sf if sf > 0 else phi
        if not (h > 0 and math.isfinite(h)):
            h = max(abs(x), 1.0)
        hi = x + h
        if math.isfinite(self.M):
            hi = min(hi, x + 0.5 * (self.M - x))
        j = np.searchsorted(self._kinks, x, side="right")
        if j < self._kinks.size and self._kinks[j] < hi:
            hi = float(self._kinks[j])
        return hi

    def _build(self, lo: float, hi: float, depth: int, out: list, parent_tail: float = math.inf) -> bool:
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        xs = mid + half * _NODES
        # near a finite M the rounded nodes drift off the Chebyshev points
        # by a visible fraction of the panel; fit at the positions actually used
        s = (xs - mid) / half
        phi = np.asarray(self.offer.phi(xs), dtype=float)
        if np.any(~np.isfinite(phi)) or np.any(phi <= 0):
            return False
        a = 1.0 / phi
        ca = _fit(a, s)
        cb = _fit(a * a, s)
        tail = max(_tail(ca), _tail(cb))
        done = tail <= COEF_TOL or (tail <= NOISE_TOL and tail > 0.5 * parent_tail)
        if depth < MAX_SPLIT_DEPTH and not done:
            mid = 0.5 * (lo + hi)
            if lo < mid < hi:
                return self._build(lo, mid, depth + 1, out, tail) and self._build(mid, hi, depth + 1, out, tail)
        p = _Panel(lo, hi)
        p.s_nodes = s
        p.a_nodes = a
        p.ia = C.chebint(ca, lbnd=-1, scl=p.half)
        p.ib = C.chebint(cb, lbnd=-1, scl=p.half)
        out.append(p)
        return True

    def _extend(self) -> None:
        """Append the next panel (or its split pieces)."""
        x = self._edge
        hi = self._step(x)
        if not (hi > x) or (math.isfinite(self.M) and (self.M - x) <= RESOLUTION_ULPS * math.ulp(self.M)):
            self._exhausted = True
            return
        new: list[_Panel] = []
        if not self._build(x, hi, 0, new):
            self._exhausted = True
            return
        for p in new:
            p.psi0, p.k0, p.j0 = self._psi, self._K, self._J
            k_nodes = p.k0 + C.chebval(p.s_nodes, p.ib)
            cc = _fit(k_nodes * p.a_nodes, p.s_nodes)
            p.ic = C.chebint(cc, lbnd=-1, scl=p.half)
            self._psi = p.psi0 + C.chebval(1.0, p.ia)
            self._K = p.k0 + C.chebval(1.0, p.ib)
            self._J = p.j0 + C.chebval(1.0, p.ic)
            self._panels.append(p)
        self._edge = new[-1].hi
        self._cache = None

    def _ensure_x(self, x: float) -> None:
        with self._lock:
            while self._edge <= x and not self._exhausted:
                self._extend()
            if self._edge <= x:
                raise DomainError(f"x={x!r} is beyond the resolvable range below M={self.M!r}")

    def _ensure_psi(self, y: float) -> None:
        with self._lock:
            while (self._psi < y or not self._panels) and not self._exhausted:
                self._extend()

    def _ensure_v(self, n: int) -> None:
        with self._lock:
            while self._v_ready < n:
                p = self._panels[self._v_ready]
                xs = p.x_nodes()
                i2 = np.asarray(self.offer.phi_tail_integral(xs), dtype=float)
                cd = _fit(i2 * p.a_nodes * p.a_nodes, p.s_nodes)
                p.id = C.chebint(cd, lbnd=-1, scl=p.half)
                p.v0 = self._V
                self._V = p.v0 + C.chebval(1.0, p.id)
                self._v_ready += 1
                self._cache = None

    def _arrays(self):
        c = self._cache
        if c is None:
            ps = self._panels
            c = {
                "lo": np.array([p.lo for p in ps]),
                "mid": np.array([p.mid for p in ps]),
                "half": np.array([p.half for p in ps]),
                "psi0": np.array([p.psi0 for p in ps]),
                "k0": np.array([p.k0 for p in ps]),
                "j0": np.array([p.j0 for p in ps]),
                "ia": np.array([p.ia for p in ps]),
                "ib": np.array([p.ib for p in ps]),
                "ic": np.array([p.ic for p in ps]),
            }
            if self._v_ready:
                c["v0"] = np.array([p.v0 for p in ps[: self._v_ready]])
                c["id"] = np.array([p.id for p in ps[: self._v_ready]])
            self._cache = c
        return c

    # -- evaluation ------------------------------------------------------------
    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.mu0) or np.any(np.isnan(x)):
            raise DomainError("argument below mu0")
        if np.any(x >= self.M):
            raise DomainError("argument at or above the support maximum")
        if x.size:
            self._ensure_x(float(np.max(x)))
        with self._lock:
            arr = self._arrays()
        i = np.clip(np.searchsorted(arr["lo"], x, side="right") - 1, 0, arr["lo"].size - 1)
        s = np.clip((x - arr["mid"][i]) / arr["half"][i], -1.0, 1.0)
        return x, i, s, arr

    def _eval(self, x, base: str, coef: str):
        xa, i, s, arr = self._locate(x)
        out = arr[base][i] + chebval_rows(s.ravel(), arr[coef][i.ravel()]).reshape(s.shape)
        out = np.where(xa == self.mu0, 0.0, out)
        return float(out) if np.ndim(x) == 0 else out

    def psi(self, x):
        return self._eval(x, "psi0", "ia")

    def K(self, x):
        return self._eval(x, "k0", "ib")

    def J(self, x):
        return self._eval(x, "j0", "ic")

    def V(self, x):
        xa = np.asarray(x, dtype=float)
        _, i, _, _ = self._locate(xa)
        self._ensure_v(int(np.max(i)) + 1 if i.size else 0)
        return self._eval(x, "v0", "id")

    def inv_psi(self, y):
        """Solve ``Psi(x) = y`` for ``y >= 0``."""
        ya = np.asarray(y, dtype=float)
        if np.any(ya < 0) or np.any(np.isnan(ya)):
            raise DomainError("Psi is only inverted on [0, inf)")
        if ya.size:
            self._ensure_psi(float(np.max(ya)))
        with self._lock:
            arr = self._arrays()
            top_psi = self._psi
        flat = ya.ravel()
        if np.any(flat > top_psi):
            raise DomainError(
                f"Psi^-1({float(np.max(flat))!r}) lies within floating resolution of M={self.M!r}"
            )
        i = np.clip(np.searchsorted(arr["psi0"], flat, side="right") - 1, 0, arr["psi0"].size - 1)
        rows = arr["ia"][i]
        target = flat - arr["psi0"][i]
        lo = np.full(flat.shape, -1.0)
        hi = np.ones(flat.shape)
        for _ in range(60):
            m = 0.5 * (lo + hi)
            below = chebval_rows(m, rows) < target
            lo = np.where(below, m, lo)
            hi = np.where(below, hi, m)
        s = 0.5 * (lo + hi)
        x = arr["mid"][i] + arr["half"][i] * s
        x = np.where(flat == 0.0, self.mu0, x)
        x = x.reshape(ya.shape)
        return float(x) if np.ndim(y) == 0 else x

    @property
    def n_panels(self) -> int:
        return len(self._panels)
