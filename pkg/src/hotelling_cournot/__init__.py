"""Equilibrium engine for a spatial Cournot duopoly, classical and entangled."""

from .analysis import (
    Axis,
    SweepResult,
    SweepSpec,
    ThresholdResult,
    aggregate_output_peak,
    compare_allowance,
    find_critical_allowance,
    find_tg,
    ordering_report,
    run_sweep,
    solve,
)
from .classical import (
    Branch,
    Equilibrium,
    SolverSettings,
    central_limit_classical,
    classical_foc_residual,
    solve_classical,
)
from .errors import ModelError
from .market import (
    MarketConfig,
    demand_jacobian,
    market_boundary,
    prices_from_quantities,
    profit,
    quantities_from_prices,
)
from .oracle import (
    OracleReport,
    best_response,
    best_response_iteration,
    multi_start_iteration,
    verify_equilibrium,
)
from .quantum import (
    GameParams,
    central_limit_quantum,
    quantum_benefit,
    quantum_foc_residual,
    quantum_quantities,
    solve_quantum,
    strategies_from_quantities,
)

__version__ = "0.1.0"
