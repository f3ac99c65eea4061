"""Classical quantity-subgame equilibrium and the shared Newton kernel.

The unknowns are the mill prices. Demand is explicit in prices, so the
first-order conditions ``p_i + q_i * dp_i/dq_i = 0`` are closed-form in
``(p1, p2)`` once ``dp/dq`` is written through the inverse of the demand
Jacobian. Multiplying by ``det J`` removes the division:

    R_i = p_i * det J + q_i * C_ii,     dp_i/dq_i = C_ii / det J.

The quantum solver reuses the same kernel with the hyperbolic weights
``(cosh g, sinh g)``; the classical game is the case ``(1, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ConvergenceError,
    InadmissibleEquilibriumError,
    ModelError,
    SingularJacobianError,
)
from .market import (
    MarketConfig,
    Pair,
    _check_transport,
    _demand,
    _jacobian_parts,
    prices_from_quantities,
)

SINGULAR_DET = 1e-14
SOC_STEP = 1e-5
NEGATIVE_STRATEGY_TOL = 1e-9


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-12
    max_iter: int = 100
    damping: int = 30  # line-search halvings per Newton step
    homotopy_step: float = 0.05

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.damping < 0:
            raise ValueError("damping must be non-negative")
        if not self.homotopy_step > 0:
            raise ValueError("homotopy_step must be positive")


class Branch(str, Enum):
    NEWTON = "newton"
    T_ZERO = "t_zero_closed_form"
    HOMOTOPY = "homotopy"


@dataclass(frozen=True)
class Equilibrium:
    """One solved quantity subgame.

    ``strategies`` is ``None`` for the classical solver. ``residual_norm`` is
    the Euclidean norm of the scaled first-order residual divided by
    ``cosh(g) * (1 + 1/(2|t|))``, which keeps it O(1) for small ``|t|``.
    """

    prices: Pair
    quantities: Pair
    strategies: Pair | None
    boundary: float
    profits: Pair
    residual_norm: float
    iterations: int
    converged: bool
    branch: Branch
    gamma: float = 0.0
    negative_strategy: bool = False
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def total_output(self) -> float:
        return self.quantities[0] + self.quantities[1]


# -- scaled first-order conditions -------------------------------------------

def _scaled_foc(p1, p2, r1, r2, t, c, s):
    """Determinant-scaled FOCs in the own strategy with weights ``(c, s)``.

    ``dq_own/dx_own = c`` and ``dq_rival/dx_own = s``; with the inverse
    Jacobian ``[[J22, -J12], [-J21, J11]] / det`` this gives
    ``R_1 = p1*c*det + q1*(J22*c - J12*s)`` and the mirror for firm 2.
    """
    q1, q2, _ = _demand(p1, p2, r1, r2, t)
    r, a, det = _jacobian_parts(p1, p2, r1, r2, t)
    j11 = -r - a
    j22 = -(1.0 - r) - a
    res1 = p1 * c * det + q1 * (j22 * c - a * s)
    res2 = p2 * c * det + q2 * (j11 * c - a * s)
    return res1, res2


def _residual_scale(t, c):
    return c * (1.0 + 1.0 / (2.0 * abs(t)))


def _foc_residual(prices: Pair, cfg: MarketConfig, c: float, s: float) -> Pair:
    _check_transport(cfg)
    p1, p2 = prices
    _, _, det = _jacobian_parts(p1, p2, cfg.r1, cfg.r2, cfg.t)
    if abs(det) < SINGULAR_DET:
        raise SingularJacobianError(f"|det J| = {abs(det):.3g} at prices {prices}")
    return _scaled_foc(p1, p2, cfg.r1, cfg.r2, cfg.t, c, s)


def classical_foc_residual(prices: Pair, cfg: MarketConfig) -> Pair:
    return _foc_residual(prices, cfg, 1.0, 0.0)


# -- Newton kernel -------------------------------------------------------------

_CSTEP = 1e-20
_EPS = 2.220446049250313e-16


def _effective_tol(settings: SolverSettings, t: float) -> float:
    """``settings.tol``, floored at the rounding level of the scaled residual.

    The boundary amplifies price roundoff by ``1/(2|t|)``, so for tiny
    transport rates the requested tolerance can be below what doubles
    resolve. For |t| > 1e-2 the floor is under 1e-12 and ``tol`` governs.
    """
    return max(settings.tol, 100.0 * _EPS * (1.0 + 1.0 / (2.0 * abs(t))))


def _newton(fun, start: Pair, settings: SolverSettings, tol: float | None = None):
    """Damped Newton on a 2x2 system; Jacobian by complex step.

    ``fun`` must be holomorphic in each argument (no abs, no branches on
    the unknowns). Returns ``(x, residual_norm, iterations)``.
    """
    tol = settings.tol if tol is None else tol
    x1, x2 = float(start[0]), float(start[1])
    f1, f2 = fun(x1, x2)
    norm = math.hypot(f1, f2)
    for it in range(settings.max_iter + 1):
        if not math.isfinite(norm):
            break
        if norm <= tol:
            return (x1, x2), norm, it
        if it == settings.max_iter:
            break
        a1, a2 = fun(complex(x1, _CSTEP), x2)
        b1, b2 = fun(x1, complex(x2, _CSTEP))
        j11, j21 = a1.imag / _CSTEP, a2.imag / _CSTEP
        j12, j22 = b1.imag / _CSTEP, b2.imag / _CSTEP
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            break
        d1 = -(j22 * f1 - j12 * f2) / det
        d2 = -(-j21 * f1 + j11 * f2) / det
        lam = 1.0
        for _ in range(settings.damping + 1):
            n1, n2 = x1 + lam * d1, x2 + lam * d2
            g1, g2 = fun(n1, n2)
            new_norm = math.hypot(g1, g2)
            if new_norm < (1.0 - 1e-4 * lam) * norm or new_norm <= tol:
                break
            lam *= 0.5
        else:
            break
        x1, x2, f1, f2, norm = n1, n2, g1, g2, new_norm
    raise ConvergenceError(
        f"Newton stalled at prices ({x1:.9g}, {x2:.9g}) with residual {norm:.3g}"
    )


def _t_zero_prices(c: float, s: float) -> float:
    return (c + s) / (3.0 * c + s)


def _residual_fun(cfg: MarketConfig, c: float, s: float):
    r1, r2, t = cfg.r1, cfg.r2, cfg.t
    scale = _residual_scale(t, c)

    def fun(p1, p2):
        a, b = _scaled_foc(p1, p2, r1, r2, t, c, s)
        return a / scale, b / scale

    return fun


def _homotopy(cfg: MarketConfig, c: float, s: float, settings: SolverSettings):
    """Continue the root in ``t`` from the known zero-transport prices."""
    p0 = _t_zero_prices(c, s)
    prices = (p0, p0)
    direction = 1.0 if cfg.t > 0 else -1.0
    step = settings.homotopy_step
    min_step = settings.homotopy_step / 64.0
    current = 0.0
    total_iter = 0
    norm = math.inf
    while current * direction < cfg.t * direction:
        target = current + direction * step
        if target * direction > cfg.t * direction:
            target = cfg.t
        try:
            step_cfg = cfg.with_t(target)
            prices, norm, iters = _newton(
                _residual_fun(step_cfg, c, s),
                prices,
                settings,
                _effective_tol(settings, target),
            )
        except ConvergenceError:
            step /= 2.0
            if step < min_step:
                raise ConvergenceError(
                    f"homotopy stalled at t = {current:.6g} on the way to {cfg.t:.6g}"
                )
            continue
        total_iter += iters
        current = target
        step = min(step * 1.5, settings.homotopy_step)
    return prices, norm, total_iter


# -- validation and assembly ---------------------------------------------------

def _own_profit_curvature(cfg, quantities, prices, firm, c, s):
    """Second difference of firm's profit along its own strategy direction.

    The step is ``SOC_STEP / c`` in strategy units, i.e. ``SOC_STEP`` of own
    output, so the probe does not blow up at large entanglement.
    """
    h = SOC_STEP / c
    if firm == 0:
        dq = (c * h, s * h)
    else:
        dq = (s * h, c * h)
    values = []
    for k in (-1.0, 0.0, 1.0):
        q = (quantities[0] + k * dq[0], quantities[1] + k * dq[1])
        if k == 0.0:
            p = prices
        else:
            p = prices_from_quantities(q, cfg, guess=prices)
        values.append(p[firm] * q[firm])
    return (values[0] - 2.0 * values[1] + values[2]) / (h * h)


def _assemble(cfg, prices, norm, iters, branch, gamma, c, s, settings, quantum):
    p1, p2 = prices
    q1, q2, r = _demand(p1, p2, cfg.r1, cfg.r2, cfg.t)
    quantities = (float(q1), float(q2))
    strategies = None
    negative = False
    if quantum:
        strategies = (q1 * c - q2 * s, q2 * c - q1 * s)
        negative = min(strategies) < -NEGATIVE_STRATEGY_TOL
    problems = []
    if not norm <= _effective_tol(settings, cfg.t):
        problems.append(f"residual {norm:.3g} above tolerance")
    if not (0.0 < p1 < 1.0 and 0.0 < p2 < 1.0):
        problems.append(f"prices ({p1:.6g}, {p2:.6g}) outside (0, 1)")
    if not (0.0 < q1 < 1.0 and 0.0 < q2 < 1.0):
        problems.append(f"quantities ({q1:.6g}, {q2:.6g}) outside (0, 1)")
    if not 0.0 < r < 1.0:
        problems.append(f"boundary {r:.6g} outside (0, 1)")
    _, _, det = _jacobian_parts(p1, p2, cfg.r1, cfg.r2, cfg.t)
    if abs(det) < SINGULAR_DET:
        problems.append(f"singular demand Jacobian (det {det:.3g})")
    if not problems:
        for firm in (0, 1):
            try:
                curv = _own_profit_curvature(cfg, quantities, prices, firm, c, s)
            except ModelError as exc:
                problems.append(f"second-order probe failed for firm {firm + 1}: {exc}")
                continue
            if not curv < 0.0:
                problems.append(f"firm {firm + 1} stationary point is not a maximum")
    diagnostics = tuple(problems)
    if negative:
        diagnostics += (
            f"negative strategy ({strategies[0]:.6g}, {strategies[1]:.6g})",
        )
    return Equilibrium(
        prices=(p1, p2),
        quantities=quantities,
        strategies=strategies,
        boundary=float(r),
        profits=(p1 * quantities[0], p2 * quantities[1]),
        residual_norm=norm,
        iterations=iters,
        converged=not problems,
        branch=branch,
        gamma=gamma,
        negative_strategy=negative,
        diagnostics=diagnostics,
    )


def _closed_form(c, s, gamma, quantum):
    q = c / (3.0 * c + s)
    p = _t_zero_prices(c, s)
    strategies = None
    if quantum:
        x = q * c - q * s
        strategies = (x, x)
    return Equilibrium(
        prices=(p, p),
        quantities=(q, q),
        strategies=strategies,
        boundary=0.5,
        profits=(p * q, p * q),
        residual_norm=0.0,
        iterations=0,
        converged=True,
        branch=Branch.T_ZERO,
        gamma=gamma,
    )


def _solve_subgame(cfg, gamma, settings, method, quantum):
    c, s = math.cosh(gamma), math.sinh(gamma)
    if cfg.flat:
        return _closed_form(c, s, gamma, quantum)
    if method not in ("auto", "newton", "homotopy"):
        raise ValueError(f"unknown method {method!r}")

    first = None
    first_error = None
    if method in ("auto", "newton"):
        p0 = _t_zero_prices(c, s)
        try:
            prices, norm, iters = _newton(
                _residual_fun(cfg, c, s), (p0, p0), settings, _effective_tol(settings, cfg.t)
            )
            first = _assemble(
                cfg, prices, norm, iters, Branch.NEWTON, gamma, c, s, settings, quantum
            )
        except ConvergenceError as exc:
            if method == "newton":
                raise
            first_error = exc
        if first is not None and (first.converged or method == "newton"):
            return _finish(first)

    try:
        prices, norm, iters = _homotopy(cfg, c, s, settings)
    except ConvergenceError as exc:
        if first is not None:
            return _finish(first)
        message = f"{first_error}; {exc}" if first_error else str(exc)
        raise ConvergenceError(message) from exc
    eq = _assemble(
        cfg, prices, norm, iters, Branch.HOMOTOPY, gamma, c, s, settings, quantum
    )
    if not eq.converged and first is not None:
        return _finish(first)
    return _finish(eq)


def _finish(eq: Equilibrium) -> Equilibrium:
    if eq.converged:
        return eq
    if any("residual" in d for d in eq.diagnostics):
        raise ConvergenceError("; ".join(eq.diagnostics), equilibrium=eq)
    raise InadmissibleEquilibriumError("; ".join(eq.diagnostics), equilibrium=eq)


def solve_classical(
    cfg: MarketConfig,
    settings: SolverSettings | None = None,
    method: str = "auto",
) -> Equilibrium:
    """Cournot-Nash equilibrium of the classical quantity subgame.

    ``method="auto"`` cold-starts Newton from p = (1/3, 1/3) and falls back to
    continuation in ``t`` from the zero-transport root. ``"homotopy"`` always
    follows the continued branch, which is what threshold searches in ``t``
    need. Failures raise ``ConvergenceError`` or
    ``InadmissibleEquilibriumError``; both carry the offending iterate.
    """
    return _solve_subgame(cfg, 0.0, settings or SolverSettings(), method, quantum=False)


def central_limit_classical(t: float) -> tuple[float, float]:
    """Equilibrium (q, p) when both firms sit arbitrarily close to the centre."""
    root = math.sqrt(97.0 * t * t + 80.0 * t + 64.0)
    return (8.0 - 13.0 * t + root) / 48.0, (16.0 + 7.0 * t - root) / 24.0
