"""Demand geometry of the linear market.

Consumers sit uniformly on [0, 1]. A consumer at ``s`` buying from firm ``i``
pays ``p_i + t*|s - r_i|`` per unit and demands ``1 - p_i - t*|s - r_i|``. The
market boundary ``r`` splits buyers between the two firms; there is no market
overlap. Negative ``t`` is a transport allowance ``u = -t``.

The private ``_`` helpers accept floats, complex numbers or numpy arrays so the
solvers can take complex-step derivatives and the oracle can vectorise scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryOutOfRangeError,
    DegenerateTransportError,
    NoAdmissibleRootError,
)

TAU0 = 1e-9  # |t| below this uses the zero-transport branch
INVERSION_TOL = 1e-12

Pair = tuple[float, float]


@dataclass(frozen=True)
class MarketConfig:
    """Firm locations and transport rate."""

    r1: float
    r2: float
    t: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.r1, self.r2, self.t)):
            raise ValueError("r1, r2 and t must be finite")
        if not 0.0 <= self.r1 <= 0.5:
            raise ValueError(f"r1 = {self.r1} must lie in [0, 0.5]")
        if not 0.5 <= self.r2 <= 1.0:
            raise ValueError(f"r2 = {self.r2} must lie in [0.5, 1]")
        if not self.r1 < self.r2:
            raise ValueError(f"r1 < r2 required (got r1={self.r1}, r2={self.r2})")

    @property
    def flat(self) -> bool:
        """True when transport is negligible and aggregate demand applies."""
        return abs(self.t) < TAU0

    @property
    def centrality_gap(self) -> float:
        """``r1 - (1 - r2)``: positive when firm 1 is nearer the centre."""
        return self.r1 - (1.0 - self.r2)

    def mirrored(self) -> "MarketConfig":
        """Relabel the firms by reflecting the market about its centre."""
        return MarketConfig(1.0 - self.r2, 1.0 - self.r1, self.t)

    def with_t(self, t: float) -> "MarketConfig":
        return MarketConfig(self.r1, self.r2, t)


def _check_transport(cfg: MarketConfig) -> None:
    if cfg.flat:
        raise DegenerateTransportError(
            f"|t| = {abs(cfg.t):.3g} < {TAU0}: use the zero-transport branch"
        )


# -- raw formulas -------------------------------------------------------------

def _boundary(p1, p2, r1, r2, t):
    return (p2 - p1) / (2.0 * t) + 0.5 * (r1 + r2)


def _demand(p1, p2, r1, r2, t):
    """Aggregate quantities and boundary for given mill prices."""
    r = _boundary(p1, p2, r1, r2, t)
    q1 = (1.0 - p1 + t * r1) * r - 0.5 * t * r * r - t * r1 * r1
    s = 1.0 - r
    q2 = (1.0 - p2 + t * (1.0 - r2)) * s - 0.5 * t * s * s - t * (1.0 - r2) ** 2
    return q1, q2, r


def _jacobian_parts(p1, p2, r1, r2, t):
    """Return ``(r, a, det)`` with ``a = A/(2t)``.

    ``A`` is the demand of the boundary consumer. The Jacobian of the
    demand map is ``[[-r - a, a], [a, -(1 - r) - a]]`` and its determinant
    simplifies to ``r(1 - r) + a`` (no cancellation for small ``t``).
    """
    r = _boundary(p1, p2, r1, r2, t)
    a = (1.0 - p1 - t * (r - r1)) / (2.0 * t)
    det = r * (1.0 - r) + a
    return r, a, det


# -- public operations --------------------------------------------------------

def market_boundary(prices: Pair, cfg: MarketConfig) -> float:
    """Location of the consumer indifferent between the two firms (unclamped)."""
    _check_transport(cfg)
    return _boundary(prices[0], prices[1], cfg.r1, cfg.r2, cfg.t)


def quantities_from_prices(prices: Pair, cfg: MarketConfig) -> Pair:
    _check_transport(cfg)
    q1, q2, r = _demand(prices[0], prices[1], cfg.r1, cfg.r2, cfg.t)
    if not 0.0 <= r <= 1.0:
        raise BoundaryOutOfRangeError(f"market boundary r = {r:.6g} outside [0, 1]")
    return float(q1), float(q2)


def profit(prices: Pair, quantities: Pair) -> Pair:
    return prices[0] * quantities[0], prices[1] * quantities[1]


def demand_jacobian(prices: Pair, cfg: MarketConfig) -> np.ndarray:
    """Analytic matrix of partials ``dq_i/dp_j``, chain rule through ``r`` included."""
    _check_transport(cfg)
    r, a, _ = _jacobian_parts(prices[0], prices[1], cfg.r1, cfg.r2, cfg.t)
    return np.array([[-r - a, a], [a, -(1.0 - r) - a]])


def _inversion_tol(t: float) -> float:
    # boundary roundoff grows like eps/(2|t|); only matters for |t| < 1e-2
    return max(INVERSION_TOL, 100.0 * 2.220446049250313e-16 * (1.0 + 1.0 / (2.0 * abs(t))))


def _admissible_prices(p1, p2, r):
    return 0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0 and 0.0 <= r <= 1.0


def _invert_newton(q, cfg, guess, max_iter=60):
    """Damped Newton for ``Q(p) = q``; returns prices or None."""
    p1, p2 = float(guess[0]), float(guess[1])
    r1, r2, t = cfg.r1, cfg.r2, cfg.t
    tol = _inversion_tol(t) * max(1.0, abs(q[0]), abs(q[1]))

    def resid(a, b):
        f1, f2, _ = _demand(a, b, r1, r2, t)
        return f1 - q[0], f2 - q[1]

    g1, g2 = resid(p1, p2)
    norm = math.hypot(g1, g2)
    for _ in range(max_iter):
        if norm <= tol:
            r = _boundary(p1, p2, r1, r2, t)
            return (p1, p2) if _admissible_prices(p1, p2, r) else None
        r, a, det = _jacobian_parts(p1, p2, r1, r2, t)
        if det == 0.0:
            return None
        j11, j12, j22 = -r - a, a, -(1.0 - r) - a
        d1 = -(j22 * g1 - j12 * g2) / det
        d2 = -(-j12 * g1 + j11 * g2) / det
        lam = 1.0
        for _ in range(30):
            n1, n2 = p1 + lam * d1, p2 + lam * d2
            h1, h2 = resid(n1, n2)
            new_norm = math.hypot(h1, h2)
            if new_norm < norm or new_norm <= tol:
                break
            lam *= 0.5
        else:
            return None
        p1, p2, g1, g2, norm = n1, n2, h1, h2, new_norm
    return None


def prices_from_quantities(
    quantities: Pair, cfg: MarketConfig, guess: Pair = (1.0 / 3.0, 1.0 / 3.0)
) -> Pair:
    """Mill prices that clear the given outputs.

    Newton from ``guess`` first; if that fails or leaves the admissible box
    (prices and boundary in [0, 1]) a coarse grid of starts over [0, 1]^2 is
    ranked by residual and retried in order.
    """
    q1, q2 = quantities
    if cfg.flat:
        p = 1.0 - q1 - q2
        if not 0.0 <= p <= 1.0:
            raise NoAdmissibleRootError(f"aggregate price {p:.6g} outside [0, 1]")
        return p, p

    root = _invert_newton(quantities, cfg, guess)
    if root is not None:
        return root

    grid = np.linspace(0.0, 1.0, 11)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    f1, f2, _ = _demand(a, b, cfg.r1, cfg.r2, cfg.t)
    order = np.argsort(np.hypot(f1 - q1, f2 - q2), axis=None, kind="stable")
    for flat_index in order[:25]:
        i, j = np.unravel_index(flat_index, a.shape)
        root = _invert_newton(quantities, cfg, (grid[i], grid[j]))
        if root is not None:
            return root
    raise NoAdmissibleRootError(
        f"no admissible price pair clears quantities ({q1:.6g}, {q2:.6g})"
    )


def invert_batch(q1, q2, cfg: MarketConfig, guess: Pair, max_iter: int = 50):
    """Vectorised inverse demand over arrays of quantity pairs.

    Returns ``(p1, p2, ok)``; ``ok`` marks cells that converged to an
    admissible root. Steps are capped at 0.25 per iteration instead of a
    line search so every cell advances in lockstep.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if cfg.flat:
        p = 1.0 - q1 - q2
        ok = (p >= 0.0) & (p <= 1.0)
        return p, p.copy(), ok

    r1, r2, t = cfg.r1, cfg.r2, cfg.t
    p1 = np.full(q1.shape, float(guess[0]))
    p2 = np.full(q1.shape, float(guess[1]))
    tol = _inversion_tol(t) * np.maximum(1.0, np.maximum(np.abs(q1), np.abs(q2)))
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            f1, f2, _ = _demand(p1, p2, r1, r2, t)
            g1, g2 = f1 - q1, f2 - q2
            done = np.hypot(g1, g2) <= tol
            if done.all():
                break
            r, a, det = _jacobian_parts(p1, p2, r1, r2, t)
            j11, j12, j22 = -r - a, a, -(1.0 - r) - a
            d1 = -(j22 * g1 - j12 * g2) / det
            d2 = -(-j12 * g1 + j11 * g2) / det
            step = np.maximum(np.abs(d1), np.abs(d2))
            shrink = np.where(step > 0.25, 0.25 / step, 1.0)
            p1 = np.where(done, p1, p1 + shrink * d1)
            p2 = np.where(done, p2, p2 + shrink * d2)
        f1, f2, r = _demand(p1, p2, r1, r2, t)
        ok = (
            (np.hypot(f1 - q1, f2 - q2) <= tol)
            & (p1 >= 0.0) & (p1 <= 1.0)
            & (p2 >= 0.0) & (p2 <= 1.0)
            & (r >= 0.0) & (r <= 1.0)
        )
    return p1, p2, ok
