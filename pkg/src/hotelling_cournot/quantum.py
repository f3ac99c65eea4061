"""Entanglement-parameterised quantity subgame.

Firms choose displacements ``x_i``; the measured outputs are the hyperbolic
mixture ``q_1 = x_1 cosh g + x_2 sinh g`` (and symmetrically ``q_2``). Only
this induced payoff map is modelled. The mixing matrix has unit determinant,
so the equilibrium is solved in price space with the shared kernel and the
strategies are recovered afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .classical import (
    Equilibrium,
    SolverSettings,
    _foc_residual,
    _solve_subgame,
    solve_classical,
)
from .market import MarketConfig, Pair


@dataclass(frozen=True)
class GameParams:
    gamma: float = 0.0
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma = {self.gamma} must be finite and >= 0")


def quantum_quantities(x: Pair, gamma: float) -> Pair:
    c, s = math.cosh(gamma), math.sinh(gamma)
    return x[0] * c + x[1] * s, x[1] * c + x[0] * s


def strategies_from_quantities(q: Pair, gamma: float) -> tuple[Pair, bool]:
    """Invert the mixing map. The flag is True when a strategy is negative."""
    c, s = math.cosh(gamma), math.sinh(gamma)
    x = (q[0] * c - q[1] * s, q[1] * c - q[0] * s)
    return x, min(x) < 0.0


def quantum_foc_residual(prices: Pair, cfg: MarketConfig, gamma: float) -> Pair:
    return _foc_residual(prices, cfg, math.cosh(gamma), math.sinh(gamma))


def solve_quantum(
    cfg: MarketConfig, params: GameParams | None = None, method: str = "auto"
) -> Equilibrium:
    """Nash equilibrium in displacement strategies.

    Negative recovered strategies do not fail the solve; they set
    ``negative_strategy`` and add a diagnostic. Away from symmetric
    locations this is the normal case for large ``gamma``, because
    ``x_1 >= 0`` needs ``q_1 / q_2 >= tanh(gamma)``.
    """
    params = params or GameParams()
    return _solve_subgame(cfg, params.gamma, params.settings, method, quantum=True)


def central_limit_quantum(t: float, gamma: float) -> tuple[float, float]:
    """Equilibrium (q, p) at the market centre for entanglement ``gamma``."""
    c, s = math.cosh(gamma), math.sinh(gamma)
    root = math.sqrt(
        (64.0 + t * (80.0 + 97.0 * t)) * c * c + t * s * (2.0 * (40.0 + t) * c + t * s)
    )
    q = ((8.0 - 13.0 * t) * c - t * s + root) / (16.0 * (3.0 * c + s))
    p = ((16.0 + 7.0 * t) * c + s * (8.0 - t) - root) / (8.0 * (3.0 * c + s))
    return q, p


def quantum_benefit(
    cfg: MarketConfig, gamma: float, settings: SolverSettings | None = None
) -> Pair:
    """Equilibrium profit gain of each firm over the classical game."""
    settings = settings or SolverSettings()
    quantum = solve_quantum(cfg, GameParams(gamma, settings))
    classical = solve_classical(cfg, settings)
    return (
        quantum.profits[0] - classical.profits[0],
        quantum.profits[1] - classical.profits[1],
    )
