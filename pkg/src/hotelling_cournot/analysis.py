"""Sweeps, threshold searches and ordering checks built on the solvers.

Location grids follow one convention throughout: ``r1`` runs up to the
centre from the left, ``r2`` from the centre to the right, with ``r1 < r2``.
Cells outside that wedge are left empty rather than mirrored in, and the
firm-swapped view of any sweep is available through
:meth:`SweepResult.transposed`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .classical import Equilibrium, SolverSettings, solve_classical
from .errors import (
    ConvergenceError,
    InadmissibleEquilibriumError,
    ModelError,
    ThresholdError,
)
from .market import MarketConfig, Pair
from .quantum import GameParams, solve_quantum

SYMMETRY_TOL = 1e-9
DEFAULT_R1 = tuple(round(0.05 * k, 10) for k in range(1, 11))
DEFAULT_R2 = tuple(round(0.5 + 0.05 * k, 10) for k in range(10))


def grid_values(lo: float, hi: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic grid, rounded so that 0.1 + 0.2 lands on 0.3."""
    if not step > 0:
        raise ValueError("step must be positive")
    if hi < lo:
        raise ValueError(f"empty grid: {lo} > {hi}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return tuple(round(lo + k * step, 10) for k in range(n + 1))


def location_grid(step: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """``r1 in {step..0.5}`` and ``r2 in {0.5..1-step}``."""
    return grid_values(step, 0.5, step), grid_values(0.5, 1.0 - step, step)


def solve(cfg: MarketConfig, gamma: float = 0.0, settings=None, method="auto"):
    """Classical solve at ``gamma == 0``, quantum otherwise."""
    settings = settings or SolverSettings()
    if gamma == 0.0:
        return solve_classical(cfg, settings, method)
    return solve_quantum(cfg, GameParams(gamma, settings), method)


def _sign(v: float, tol: float = SYMMETRY_TOL) -> int:
    if v > tol:
        return 1
    if v < -tol:
        return -1
    return 0


# -- sweeps ----------------------------------------------------------------------

class AxisName(str, Enum):
    R1 = "r1"
    R2 = "r2"
    T = "t"
    GAMMA = "gamma"


class Quantity(str, Enum):
    PRICE = "price"
    QUANTITY = "quantity"
    PROFIT = "profit"
    BENEFIT = "benefit"
    STRATEGY = "strategy"


@dataclass(frozen=True)
class Axis:
    name: AxisName
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        object.__setattr__(self, "name", AxisName(self.name))
        if not self.step > 0:
            raise ValueError(f"axis {self.name.value}: step must be positive")
        if self.hi < self.lo:
            raise ValueError(f"axis {self.name.value}: empty range")

    @property
    def values(self) -> tuple[float, ...]:
        return grid_values(self.lo, self.hi, self.step)


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis
    fixed: dict = field(default_factory=dict)
    quantity: Quantity = Quantity.PROFIT
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        if self.axis1.name == self.axis2.name:
            raise ValueError("sweep axes must be distinct")
        names = {a.value for a in AxisName}
        for key in self.fixed:
            if key not in names:
                raise ValueError(f"unknown fixed parameter {key!r}")
            if key in (self.axis1.name.value, self.axis2.name.value):
                raise ValueError(f"{key!r} is both swept and fixed")
        defaults = {"r1": 0.3, "r2": 0.6, "t": 0.2, "gamma": 0.0}
        object.__setattr__(self, "fixed", {**defaults, **self.fixed})
        if self.fixed["gamma"] < 0.0:
            raise ValueError("gamma must be non-negative")

    @property
    def is_location_sweep(self) -> bool:
        return {self.axis1.name, self.axis2.name} & {AxisName.R1, AxisName.R2} != set()

    def to_dict(self) -> dict:
        return {
            "axis1": _axis_dict(self.axis1),
            "axis2": _axis_dict(self.axis2),
            "fixed": {
                k: v
                for k, v in self.fixed.items()
                if k not in (self.axis1.name.value, self.axis2.name.value)
            },
            "quantity": self.quantity.value,
        }


def _axis_dict(axis: Axis) -> dict:
    return {"name": axis.name.value, "min": axis.lo, "max": axis.hi, "step": axis.step}


@dataclass(frozen=True)
class Cell:
    """One grid point. ``error`` is a short code when the solve failed."""

    params: dict
    equilibrium: Equilibrium | None = None
    classical: Equilibrium | None = None
    error: str | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.error is None and self.equilibrium is not None

    @property
    def benefit(self) -> Pair | None:
        if not self.ok or self.classical is None:
            return None
        q, c = self.equilibrium.profits, self.classical.profits
        return q[0] - c[0], q[1] - c[1]


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    axis1: tuple[float, ...]
    axis2: tuple[float, ...]
    cells: tuple[tuple[Cell | None, ...], ...]  # None outside the location wedge

    def __iter__(self):
        for row in self.cells:
            for cell in row:
                if cell is not None:
                    yield cell

    def field(self, name: str, firm: int = 1) -> np.ndarray:
        """2-D array of one output; NaN where the cell is empty or failed."""
        out = np.full((len(self.axis1), len(self.axis2)), np.nan)
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                value = _cell_value(cell, name, firm)
                if value is not None:
                    out[i, j] = value
        return out

    def transposed(self) -> "SweepResult":
        """Firm-swapped view of a location sweep.

        The cell ``(r1, r2)`` of the result holds the original record for
        ``(1 - r2, 1 - r1)`` with the firm labels exchanged, i.e. the data a
        firm sees when it stands at the rival's mirrored site.
        """
        lookup = {}
        for cell in self:
            key = (round(cell.params["r1"], 9), round(cell.params["r2"], 9))
            lookup[key] = cell
        rows = []
        for row in self.cells:
            new_row = []
            for cell in row:
                if cell is None:
                    new_row.append(None)
                    continue
                p = cell.params
                src = lookup.get((round(1.0 - p["r2"], 9), round(1.0 - p["r1"], 9)))
                new_row.append(None if src is None else _swap_cell(src, p))
            rows.append(tuple(new_row))
        return replace(self, cells=tuple(rows))


def _swap(pair):
    return None if pair is None else (pair[1], pair[0])


def _swap_eq(eq: Equilibrium | None) -> Equilibrium | None:
    if eq is None:
        return None
    return replace(
        eq,
        prices=_swap(eq.prices),
        quantities=_swap(eq.quantities),
        strategies=_swap(eq.strategies),
        profits=_swap(eq.profits),
        boundary=1.0 - eq.boundary,
    )


def _swap_cell(cell: Cell, params: dict) -> Cell:
    return replace(
        cell,
        params=dict(params),
        equilibrium=_swap_eq(cell.equilibrium),
        classical=_swap_eq(cell.classical),
    )


def _cell_value(cell: Cell | None, name: str, firm: int):
    if cell is None or not cell.ok:
        return None
    k = firm - 1
    eq = cell.equilibrium
    if name in ("price", "prices"):
        return eq.prices[k]
    if name in ("quantity", "quantities"):
        return eq.quantities[k]
    if name in ("profit", "profits"):
        return eq.profits[k]
    if name in ("strategy", "strategies"):
        return None if eq.strategies is None else eq.strategies[k]
    if name == "benefit":
        b = cell.benefit
        return None if b is None else b[k]
    if name == "boundary":
        return eq.boundary
    if name == "total_output":
        return eq.total_output
    raise ValueError(f"unknown field {name!r}")


def _in_wedge(r1: float, r2: float) -> bool:
    return 0.0 <= r1 <= 0.5 <= r2 <= 1.0 and r1 < r2


def solve_cell(params: dict, settings: SolverSettings, with_classical: bool) -> Cell:
    try:
        cfg = MarketConfig(params["r1"], params["r2"], params["t"])
        eq = solve(cfg, params["gamma"], settings)
        classical = None
        if with_classical:
            classical = eq if params["gamma"] == 0.0 else solve_classical(cfg, settings)
    except ModelError as exc:
        return Cell(params, error=exc.code, message=str(exc))
    except ValueError as exc:
        return Cell(params, error="invalid_parameters", message=str(exc))
    return Cell(params, eq, classical)


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Solve every admissible cell of a two-axis grid.

    Failures are recorded per cell and never abort the sweep. In location
    sweeps cells outside ``r1 <= 0.5 <= r2, r1 < r2`` are left as ``None``.
    """
    v1, v2 = spec.axis1.values, spec.axis2.values
    with_classical = spec.quantity is Quantity.BENEFIT
    rows = []
    for a in v1:
        row = []
        for b in v2:
            params = dict(spec.fixed)
            params[spec.axis1.name.value] = a
            params[spec.axis2.name.value] = b
            if spec.is_location_sweep and not _in_wedge(params["r1"], params["r2"]):
                row.append(None)
                continue
            row.append(solve_cell(params, spec.settings, with_classical))
        rows.append(tuple(row))
    return SweepResult(spec, v1, v2, tuple(rows))


# -- thresholds ------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdResult:
    value: float
    bracket: Pair
    grid_used: float | None
    evaluations: int
    reason: str = ""


def _bisect(pred, lo: float, hi: float, tol: float):
    """Shrink ``[lo, hi]`` keeping ``pred(lo) != pred(hi)``."""
    p_lo, p_hi = pred(lo), pred(hi)
    evaluations = 2
    if p_lo == p_hi:
        raise ThresholdError(
            f"predicate is {p_lo} at both ends of [{lo:.6g}, {hi:.6g}]"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == p_lo:
            lo = mid
        else:
            hi = mid
        evaluations += 1
    return lo, hi, evaluations


LOCATION_STEP = 1e-4


def _own_profit(r1, r2, t, gamma, firm, settings):
    eq = solve(MarketConfig(r1, r2, t), gamma, settings)
    return eq.profits[firm - 1]


def location_incentive(
    r1: float,
    r2: float,
    t: float,
    gamma: float = 0.0,
    firm: int = 1,
    h: float = LOCATION_STEP,
    settings: SolverSettings | None = None,
) -> float:
    """Gain in own profit per unit move toward the centre.

    Second-order one-sided difference taken on the peripheral side so the
    probe never crosses the centre or the rival. Positive means the firm
    would rather sit closer to the middle of the market.
    """
    settings = settings or SolverSettings()
    if firm == 1:
        f0 = _own_profit(r1, r2, t, gamma, 1, settings)
        f1 = _own_profit(r1 - h, r2, t, gamma, 1, settings)
        f2 = _own_profit(r1 - 2 * h, r2, t, gamma, 1, settings)
    else:
        f0 = _own_profit(r1, r2, t, gamma, 2, settings)
        f1 = _own_profit(r1, r2 + h, t, gamma, 2, settings)
        f2 = _own_profit(r1, r2 + 2 * h, t, gamma, 2, settings)
    return (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h)


def centre_advantage(
    t: float, gamma: float = 0.0, grid_step: float = 0.025, settings=None
) -> tuple[bool, tuple[float, float] | None]:
    """Does every firm on the grid gain by moving toward the centre?

    Returns the flag and the first cell that fails it. Only firm 1 is
    probed: by mirror symmetry firm 2's incentive at ``(r1, r2)`` equals
    firm 1's at ``(1 - r2, 1 - r1)``, which is also on the grid.
    """
    r1_values, r2_values = location_grid(grid_step)
    # cells nearest the centre bind first; scan them first for an early exit
    for r1 in sorted(r1_values, reverse=True):
        for r2 in r2_values:
            if r1 < 2 * LOCATION_STEP or not _in_wedge(r1, r2):
                continue
            try:
                gain = location_incentive(r1, r2, t, gamma, 1, settings=settings)
            except ModelError:
                return False, (r1, r2)
            if not gain > 0.0:
                return False, (r1, r2)
    return True, None


def find_tg(
    gamma: float = 0.0,
    grid_step: float = 0.025,
    tol: float = 1e-3,
    t_lo: float = 0.05,
    t_hi: float = 1.0,
    settings: SolverSettings | None = None,
) -> ThresholdResult:
    """Largest transport rate at which centrality pays everywhere on the grid.

    Below the threshold every firm on the location grid strictly gains
    profit by moving toward the centre; above it some firm near the
    middle prefers to back away from its rival. ``t = 0`` is excluded from
    the bracket because profits do not depend on location there.
    """
    if not 0.0 < grid_step <= 0.25:
        raise ValueError("grid_step must lie in (0, 0.25]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    blocking = {}

    def pred(t):
        ok, cell = centre_advantage(t, gamma, grid_step, settings)
        if not ok:
            blocking[t] = cell
        return ok

    lo, hi, n = _bisect(pred, t_lo, t_hi, tol)
    cell = blocking.get(hi)
    reason = "" if cell is None else f"first failing cell r1={cell[0]:g}, r2={cell[1]:g}"
    return ThresholdResult(0.5 * (lo + hi), (lo, hi), grid_step, n, reason)


def _allowance_state(r1, r2, t, gamma, firm, settings):
    """``(valid, reason)`` for the continued equilibrium at transport rate t."""
    cfg = MarketConfig(r1, r2, t)
    try:
        eq = solve(cfg, gamma, settings, method="homotopy")
    except (ConvergenceError, InadmissibleEquilibriumError) as exc:
        eq = exc.equilibrium
        if eq is None:
            return False, exc.code
        if not any("maximum" in d or "second-order" in d for d in eq.diagnostics):
            return False, "profit"
        return False, "second_order"
    except ModelError as exc:
        return False, exc.code
    profits = eq.profits if firm is None else (eq.profits[firm - 1],)
    if min(profits) <= 0.0:
        return False, "profit"
    return True, ""


def find_critical_allowance(
    r1: float,
    r2: float,
    gamma: float = 0.0,
    tol: float = 1e-4,
    bracket: Pair = (-1.5, 0.0),
    firm: int | None = None,
    settings: SolverSettings | None = None,
    scan_step: float = 0.05,
) -> ThresholdResult:
    """First transport rate below zero at which the continued equilibrium fails.

    The branch is tracked by continuation from ``t = 0``. It stops being an
    equilibrium either when a profit (the smaller one, or ``firm``'s) hits
    zero or when a firm's stationary point stops being a maximum; the
    ``reason`` field says which. The allowance is ``u_c = -value``.

    Validity is not monotone far out on the branch (a profit can dip below
    zero and recover), so the bracket is walked down from its upper end in
    ``scan_step`` increments and bisection runs only inside the first step
    where validity is lost.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if firm not in (None, 1, 2):
        raise ValueError("firm must be None, 1 or 2")
    if not bracket[0] < bracket[1]:
        raise ValueError("bracket must be (lo, hi) with lo < hi")
    settings = settings or SolverSettings()
    reasons = {}

    def pred(t):
        ok, why = _allowance_state(r1, r2, t, gamma, firm, settings)
        reasons[t] = why
        return ok

    hi = bracket[1]
    if not pred(hi):
        raise ThresholdError(f"equilibrium already invalid at t = {hi:.6g}")
    evaluations = 1
    while True:
        lo = max(hi - scan_step, bracket[0])
        evaluations += 1
        if not pred(lo):
            break
        if lo <= bracket[0]:
            raise ThresholdError(
                f"equilibrium stays valid down to t = {bracket[0]:.6g}"
            )
        hi = lo
    lo, hi, n = _bisect(pred, lo, hi, tol)
    return ThresholdResult(0.5 * (lo + hi), (lo, hi), None, evaluations + n - 2, reasons[lo])


@dataclass(frozen=True)
class AllowanceComparison:
    classical: ThresholdResult
    quantum: ThresholdResult
    witness_t: float | None
    quantum_profits: Pair | None
    classical_profits: Pair | None

    @property
    def ordered(self) -> bool:
        """Quantum threshold strictly below classical, both negative."""
        return self.quantum.bracket[1] < self.classical.bracket[0] and self.classical.value < 0


def _branch_profits(cfg, gamma, settings):
    try:
        return solve(cfg, gamma, settings, method="homotopy"), True
    except (ConvergenceError, InadmissibleEquilibriumError) as exc:
        return exc.equilibrium, False


def compare_allowance(
    r1: float,
    r2: float,
    gamma: float,
    tol: float = 1e-4,
    settings=None,
    bracket: Pair = (-1.5, 0.0),
) -> AllowanceComparison:
    """Classical and quantum critical rates plus a witness between them.

    The witness is the midpoint of the gap: there the quantum equilibrium
    is valid with both profits positive while a classical profit is
    already negative. ``witness_t`` is None if no such point was found.
    """
    settings = settings or SolverSettings()
    tc = find_critical_allowance(r1, r2, 0.0, tol, bracket, settings=settings)
    tq = find_critical_allowance(r1, r2, gamma, tol, bracket, settings=settings)
    witness = qp = cp = None
    if tq.bracket[1] < tc.bracket[0]:
        t = 0.5 * (tq.bracket[1] + tc.bracket[0])
        cfg = MarketConfig(r1, r2, t)
        q_eq, q_ok = _branch_profits(cfg, gamma, settings)
        c_eq, _ = _branch_profits(cfg, 0.0, settings)
        if q_ok and min(q_eq.profits) > 0 and c_eq is not None and min(c_eq.profits) < 0:
            witness, qp, cp = t, q_eq.profits, c_eq.profits
    return AllowanceComparison(tc, tq, witness, qp, cp)


# -- orderings and aggregate output -----------------------------------------------

@dataclass(frozen=True)
class OrderingCell:
    r1: float
    r2: float
    centrality: int  # +1 when firm 1 is nearer the centre
    output: int
    price: int
    profit: int
    error: str | None = None


@dataclass(frozen=True)
class OrderingReport:
    t: float
    gamma: float
    cells: tuple[OrderingCell, ...]

    def _count(self, attr, sign):
        return sum(
            1 for c in self.cells
            if c.error is None and c.centrality != 0 and getattr(c, attr) == sign * c.centrality
        )

    @property
    def compared(self) -> int:
        return sum(1 for c in self.cells if c.error is None and c.centrality != 0)

    @property
    def failed(self) -> int:
        return sum(1 for c in self.cells if c.error is not None)

    def aligned(self, attr: str) -> bool:
        """Every asymmetric cell orders ``attr`` the same way as centrality."""
        return self.failed == 0 and self._count(attr, 1) == self.compared

    def reversed(self, attr: str) -> bool:
        return self.failed == 0 and self._count(attr, -1) == self.compared

    @property
    def symmetric_ties(self) -> bool:
        """Symmetric cells show no difference in any field."""
        return all(
            c.output == c.price == c.profit == 0
            for c in self.cells
            if c.error is None and c.centrality == 0
        )

    @property
    def pattern(self) -> str:
        fields = ("output", "price", "profit")
        if all(self.aligned(f) for f in fields):
            return "aligned"
        if all(self.reversed(f) for f in fields):
            return "reversed"
        if self.reversed("profit"):
            return "profit_reversed"
        return "mixed"

    def violations(self, attr: str, expected: int = 1) -> list[OrderingCell]:
        return [
            c for c in self.cells
            if c.error is None and c.centrality != 0
            and getattr(c, attr) != expected * c.centrality
        ]


def ordering_report(
    t: float,
    gamma: float = 0.0,
    r1_values=DEFAULT_R1,
    r2_values=DEFAULT_R2,
    settings=None,
) -> OrderingReport:
    """Sign of each firm-1-minus-firm-2 difference against centrality."""
    cells = []
    for r1 in r1_values:
        for r2 in r2_values:
            if not _in_wedge(r1, r2):
                continue
            gap = _sign(r1 - (1.0 - r2))
            try:
                eq = solve(MarketConfig(r1, r2, t), gamma, settings)
            except ModelError as exc:
                cells.append(OrderingCell(r1, r2, gap, 0, 0, 0, exc.code))
                continue
            (q1, q2), (p1, p2), (a, b) = eq.quantities, eq.prices, eq.profits
            cells.append(
                OrderingCell(r1, r2, gap, _sign(q1 - q2), _sign(p1 - p2), _sign(a - b))
            )
    return OrderingReport(t, gamma, tuple(cells))


@dataclass(frozen=True)
class OutputPeak:
    """Grid argmax of total output, with an optional refinement.

    ``refined`` is the continuous maximiser along the symmetric line
    ``r1 = 1 - r2`` near the grid peak. Under strong entanglement the peak
    drifts from the quartiles by only ``O(e^{-2g})``, far below any usable
    grid step, so comparisons across ``t`` need the refined pair.
    """

    r1: float
    r2: float
    total_output: float
    symmetric: bool
    flat: bool
    refined: Pair | None = None

    @property
    def distance_from_centre(self) -> float:
        r1, r2 = self.refined if self.refined is not None else (self.r1, self.r2)
        return 0.5 * ((0.5 - r1) + (r2 - 0.5))


PEAK_SLOPE_STEP = 1e-4


def _symmetric_peak(t, gamma, d_lo, d_hi, settings, tol=1e-10):
    """Half-distance ``d`` maximising total output at ``(0.5 - d, 0.5 + d)``."""
    h = PEAK_SLOPE_STEP

    def total(d):
        return solve(MarketConfig(0.5 - d, 0.5 + d, t), gamma, settings).total_output

    def rising(d):
        return total(d + h) - total(d - h) > 0.0

    lo, hi, _ = _bisect(rising, d_lo, d_hi, tol)
    return 0.5 * (lo + hi)


def aggregate_output_peak(
    t: float,
    gamma: float = 0.0,
    grid_step: float = 0.05,
    refine: bool = True,
    settings=None,
) -> OutputPeak:
    """Location pair with the largest ``q1 + q2`` on the grid.

    Ties go to the first cell in grid order. ``flat`` reports that the
    total is the same everywhere (as happens at ``t = 0``). With
    ``refine`` a symmetric grid peak is polished along the symmetric line
    within one grid step.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    r1_values, r2_values = location_grid(grid_step)
    best, lowest = None, math.inf
    for r1 in r1_values:
        for r2 in r2_values:
            if not _in_wedge(r1, r2):
                continue
            try:
                total = solve(MarketConfig(r1, r2, t), gamma, settings).total_output
            except ModelError:
                continue
            lowest = min(lowest, total)
            if best is None or total > best[2]:
                best = (r1, r2, total)
    if best is None:
        raise ModelError("no cell of the grid could be solved")
    r1, r2, total = best
    symmetric = abs(r1 - (1.0 - r2)) <= grid_step / 2
    flat = total - lowest <= 1e-12
    refined = None
    if refine and symmetric and not flat:
        d = 0.5 * (r2 - r1)
        margin = 2 * PEAK_SLOPE_STEP
        lo = max(d - grid_step, margin)
        hi = min(d + grid_step, 0.5 - margin)
        try:
            d_star = _symmetric_peak(t, gamma, lo, hi, settings)
            refined = (0.5 - d_star, 0.5 + d_star)
        except ModelError:
            refined = None
    return OutputPeak(r1, r2, total, symmetric, flat, refined)
