"""Brute-force Nash verification by grid-searched best responses.

Nothing here touches the first-order conditions: profits come from the
demand inversion alone, so agreement with the solvers is an independent
check.

In the quantum game the rival's displacement ``x_j`` is held fixed. A firm
moving its own ``x_i`` shifts both outputs along ``(cosh g, sinh g)``. The
scan is laid out uniformly in the firm's own output ``q_i in [0, 1]``, which
is an affine reparameterisation of ``x_i``; at ``g = 0`` it is the plain
quantity grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import Equilibrium
from .errors import ModelError, NoAdmissibleRootError, ScanRangeError
from .market import MarketConfig, Pair, invert_batch, prices_from_quantities

GAIN_TOL = 1e-6
MATCH_TOL = 1e-4


@dataclass(frozen=True)
class OracleReport:
    max_deviation_gain: float
    best_deviation: float
    grid_coarse: float
    grid_fine: float
    iterations: int
    agrees: bool
    responses: Pair
    gains: Pair
    skipped_cells: int


@dataclass(frozen=True)
class _Response:
    strategy: float
    profit: float
    skipped: int


def _weights(gamma):
    return math.cosh(gamma), math.sinh(gamma)


def _quantities(own_q, opponent_x, who, c, s):
    """Outputs of both firms when firm ``who`` produces ``own_q`` directly."""
    own_x = (own_q - opponent_x * s) / c
    rival_q = opponent_x * c + own_x * s
    if who == 1:
        return own_q, rival_q, own_x
    return rival_q, own_q, own_x


def _scan(own_q, opponent_x, who, cfg, c, s, guess):
    q1, q2, own_x = _quantities(own_q, opponent_x, who, c, s)
    p1, p2, ok = invert_batch(q1, q2, cfg, guess)
    if not ok.all():
        # second pass from a neutral start for cells the warm start missed
        retry = ~ok
        a1, a2, ok2 = invert_batch(q1[retry], q2[retry], cfg, (0.5, 0.5))
        p1[retry], p2[retry] = a1, a2
        ok[retry] = ok2
    own_p = p1 if who == 1 else p2
    values = np.where(ok, own_p * own_q, -np.inf)
    return values, own_x, int((~ok).sum())


def _profit_at(own_q, opponent_x, who, cfg, c, s, guess):
    q1, q2, _ = _quantities(own_q, opponent_x, who, c, s)
    p = prices_from_quantities((q1, q2), cfg, guess)
    return (p[0] if who == 1 else p[1]) * own_q


def _best_response(opponent_value, who, cfg, gamma, grid_coarse, grid_fine, guess):
    if who not in (1, 2):
        raise ValueError("who must be 1 or 2")
    c, s = _weights(gamma)
    if guess is None:
        p0 = (c + s) / (3.0 * c + s)
        guess = (p0, p0)

    n = int(round(1.0 / grid_coarse))
    coarse = np.linspace(0.0, 1.0, n + 1)
    values, _, skipped = _scan(coarse, opponent_value, who, cfg, c, s, guess)
    if not np.isfinite(values).any():
        raise NoAdmissibleRootError(
            f"no admissible own output for firm {who} against {opponent_value:.6g}"
        )
    k = int(np.argmax(values))
    if k == n:
        raise ScanRangeError(f"best response of firm {who} sits on the upper scan edge")

    m = int(round(grid_coarse / grid_fine))
    fine = coarse[k] + grid_fine * np.arange(-m, m + 1)
    fine = fine[(fine >= 0.0) & (fine <= 1.0)]
    fvalues, _, fskipped = _scan(fine, opponent_value, who, cfg, c, s, guess)
    j = int(np.argmax(fvalues))
    best_q, best_val = float(fine[j]), float(fvalues[j])

    # parabolic polish through the fine-grid neighbours; stays within one cell
    if 0 < j < len(fine) - 1 and np.isfinite(fvalues[j - 1 : j + 2]).all():
        fm, f0, fp = fvalues[j - 1], fvalues[j], fvalues[j + 1]
        curvature = fm - 2.0 * f0 + fp
        if curvature < 0.0:
            delta = 0.5 * grid_fine * (fm - fp) / curvature
            delta = max(-grid_fine, min(grid_fine, delta))
            try:
                val = _profit_at(best_q + delta, opponent_value, who, cfg, c, s, guess)
            except ModelError:
                val = -math.inf
            if val >= best_val:
                best_q, best_val = best_q + delta, val

    own_x = (best_q - opponent_value * s) / c
    return _Response(float(own_x), float(best_val), skipped + fskipped)


def best_response(
    opponent_value: float,
    who: int,
    cfg: MarketConfig,
    gamma: float = 0.0,
    grid_coarse: float = 1e-3,
    grid_fine: float = 1e-5,
    guess: Pair | None = None,
) -> float:
    """Profit-maximising own strategy against a fixed rival strategy.

    The rival's value is a quantity when ``gamma == 0`` and a displacement
    otherwise. Cells whose outputs admit no admissible price pair score
    minus infinity.
    """
    return _best_response(
        opponent_value, who, cfg, gamma, grid_coarse, grid_fine, guess
    ).strategy


def candidate_strategies(candidate: Equilibrium, gamma: float) -> Pair:
    if gamma == 0.0 or candidate.strategies is None:
        if gamma == 0.0:
            return candidate.quantities
        c, s = _weights(gamma)
        q1, q2 = candidate.quantities
        return q1 * c - q2 * s, q2 * c - q1 * s
    return candidate.strategies


def verify_equilibrium(
    candidate: Equilibrium,
    cfg: MarketConfig,
    gamma: float = 0.0,
    grid_coarse: float = 1e-3,
    grid_fine: float = 1e-5,
    gain_tol: float = GAIN_TOL,
    match_tol: float = MATCH_TOL,
) -> OracleReport:
    """Check that neither firm gains by a unilateral deviation."""
    x = candidate_strategies(candidate, gamma)
    responses, gains, skipped = [], [], 0
    for who in (1, 2):
        rival = x[1] if who == 1 else x[0]
        br = _best_response(
            rival, who, cfg, gamma, grid_coarse, grid_fine, candidate.prices
        )
        responses.append(br.strategy)
        gains.append(br.profit - candidate.profits[who - 1])
        skipped += br.skipped
    worst = int(np.argmax(gains))
    c = math.cosh(gamma)
    agrees = (
        max(gains) <= gain_tol
        and abs(responses[0] - x[0]) <= match_tol
        and abs(responses[1] - x[1]) <= match_tol
    )
    return OracleReport(
        max_deviation_gain=float(max(gains)),
        best_deviation=float(responses[worst]),
        grid_coarse=grid_coarse / c,
        grid_fine=grid_fine / c,
        iterations=1,
        agrees=bool(agrees),
        responses=(float(responses[0]), float(responses[1])),
        gains=(float(gains[0]), float(gains[1])),
        skipped_cells=skipped,
    )


def best_response_iteration(
    start: Pair,
    cfg: MarketConfig,
    gamma: float = 0.0,
    max_sweeps: int = 200,
    tol: float = 1e-6,
    accelerate: bool = True,
    grid_coarse: float = 1e-3,
    grid_fine: float = 1e-5,
) -> tuple[Pair, bool]:
    """Alternate best responses (firm 1, then firm 2) until the pair settles.

    One sweep maps the rival strategy ``x2`` to ``BR2(BR1(x2))``. Under
    entanglement this map has slope near +1 (the reaction slopes approach
    -1), so plain sweeps barely contract; with ``accelerate`` the sweep
    input is updated by a secant step on ``BR2(BR1(y)) - y`` once two
    sweeps are available. The fixed point is the same either way.
    """
    y = float(start[1])
    prev_pair = (float(start[0]), y)
    history: list[tuple[float, float]] = []
    fallback = None
    for _ in range(max_sweeps):
        try:
            r1 = _best_response(y, 1, cfg, gamma, grid_coarse, grid_fine, None)
            r2 = _best_response(r1.strategy, 2, cfg, gamma, grid_coarse, grid_fine, None)
        except ModelError:
            if fallback is None:
                return prev_pair, False
            # secant overshot into an inadmissible region; take the plain sweep
            y, fallback = fallback, None
            history.pop()
            continue
        pair = (r1.strategy, r2.strategy)
        history.append((y, r2.strategy - y))
        y_next = r2.strategy
        fallback = None
        if accelerate and len(history) >= 2:
            (ya, ha), (yb, hb) = history[-2], history[-1]
            if hb != ha:
                y_secant = yb - hb * (yb - ya) / (hb - ha)
                if math.isfinite(y_secant):
                    fallback, y_next = y_next, y_secant
        # a plain sweep moves little when the map is nearly neutral, so the
        # proposed next input (secant estimate of the fixed point) must settle too
        settled = max(abs(pair[0] - prev_pair[0]), abs(pair[1] - prev_pair[1])) < tol
        if settled and abs(y_next - y) < tol and (len(history) >= 2 or not accelerate):
            return pair, True
        prev_pair = pair
        y = y_next
    return prev_pair, False


def multi_start_iteration(
    cfg: MarketConfig, gamma: float = 0.0, max_sweeps: int = 200
) -> tuple[list[Pair], bool]:
    """Run the iteration from four corner starts; report whether all agree.

    The corners are ``{x0/2, 3*x0/2}^2`` around the zero-transport
    equilibrium strategy ``x0``. Output-space corners are useless under
    entanglement: a spread in outputs becomes a spread of order ``e^g`` in
    strategies, far outside any admissible response.
    """
    c, s = _weights(gamma)
    x0 = c / (3.0 * c + s) * (c - s)
    points = []
    for a in (0.5 * x0, 1.5 * x0):
        for b in (0.5 * x0, 1.5 * x0):
            pair, ok = best_response_iteration((a, b), cfg, gamma, max_sweeps)
            if ok:
                points.append(pair)
    agree = len(points) == 4 and all(
        max(abs(p[0] - points[0][0]), abs(p[1] - points[0][1])) <= MATCH_TOL
        for p in points
    )
    return points, agree
