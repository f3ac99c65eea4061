"""Acceptance criteria 1-10, each at its stated tolerance and time budget.

Every test records one line ``criterion N: PASS|FAIL <detail>``; the lines
are collected and printed together in the terminal summary (see conftest).
"""

import itertools
import math
import time

import pytest

from hotelling_cournot import (
    GameParams,
    MarketConfig,
    central_limit_classical,
    central_limit_quantum,
    multi_start_iteration,
    solve_classical,
    solve_quantum,
    verify_equilibrium,
)
from hotelling_cournot.analysis import (
    aggregate_output_peak,
    compare_allowance,
    find_tg,
    ordering_report,
)
from hotelling_cournot.classical import Branch
from hotelling_cournot.oracle import candidate_strategies

_log: dict[int, str] = {}


@pytest.fixture(autouse=True)
def _bind_log(acceptance_log):
    global _log
    _log = acceptance_log


def record(n: int, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {n}: {status} {detail} [{elapsed:.2f}s of {budget:g}s]"
    _log[n] = line
    print(line)
    assert ok, line
    assert in_time, line


def test_criterion_01_classical_zero_transport():
    t0 = time.perf_counter()
    eq = solve_classical(MarketConfig(0.3, 0.6, 0.0))
    exact = (
        eq.branch is Branch.T_ZERO
        and eq.quantities == (1 / 3, 1 / 3)
        and eq.prices == (1 / 3, 1 / 3)
        and all(abs(v - 1 / 9) < 1e-16 for v in eq.profits)
    )
    near = solve_classical(MarketConfig(0.3, 0.6, 1e-6))
    err = max(
        abs(v - 1 / 3) for v in near.quantities + near.prices
    )
    ok = exact and near.converged and err <= 1e-4
    record(1, ok, f"closed form exact={exact}, Newton at t=1e-6 off by {err:.2e}",
           time.perf_counter() - t0, 1)


def test_criterion_02_central_limits():
    t0 = time.perf_counter()
    worst = 0.0
    for t in (0.1, 0.2, 0.4, 0.6):
        cfg = MarketConfig(0.4995, 0.5005, t)
        q, p = central_limit_classical(t)
        eq = solve_classical(cfg)
        worst = max(worst, *(abs(v - q) for v in eq.quantities), *(abs(v - p) for v in eq.prices))
        for gamma in (1.0, 5.0):
            q, p = central_limit_quantum(t, gamma)
            eq = solve_quantum(cfg, GameParams(gamma))
            worst = max(worst, *(abs(v - q) for v in eq.quantities),
                        *(abs(v - p) for v in eq.prices))
    record(2, worst <= 5e-3, f"max deviation {worst:.2e} (tol 5e-3)",
           time.perf_counter() - t0, 5)


def test_criterion_03_quantum_zero_transport():
    t0 = time.perf_counter()
    cfg = MarketConfig(0.3, 0.6, 0.0)
    c, s = math.cosh(5.0), math.sinh(5.0)
    eq5 = solve_quantum(cfg, GameParams(5.0))
    q_err = max(abs(v - c / (3 * c + s)) for v in eq5.quantities)
    total5 = sum(eq5.profits)
    total20 = sum(solve_quantum(cfg, GameParams(20.0)).profits)
    ok = q_err < 1e-15 and abs(total5 - 0.25) < 1e-4 and abs(total20 - 0.25) < 1e-8
    record(3, ok, f"q={eq5.quantities[0]:.6f}, total profit g=5 {total5:.9f}, "
           f"g=20 off by {abs(total20 - 0.25):.1e}", time.perf_counter() - t0, 1)


def test_criterion_04_classical_reduction():
    t0 = time.perf_counter()
    worst = 0.0
    r1s, r2s = (0.0, 0.1, 0.2, 0.35, 0.5), (0.55, 0.65, 0.75, 0.9, 1.0)
    for r1, r2, t in itertools.product(r1s, r2s, (-0.2, 0.2, 0.6)):
        cfg = MarketConfig(r1, r2, t)
        a = solve_quantum(cfg, GameParams(0.0))
        b = solve_classical(cfg)
        fields = zip(a.prices + a.quantities + a.profits + (a.boundary, a.residual_norm),
                     b.prices + b.quantities + b.profits + (b.boundary, b.residual_norm))
        worst = max(worst, max(abs(x - y) for x, y in fields))
    record(4, worst <= 1e-10, f"max field difference {worst:.1e} over 75 cells",
           time.perf_counter() - t0, 30)


def test_criterion_05_transport_threshold():
    t0 = time.perf_counter()
    tg0 = find_tg(0.0, grid_step=0.025)
    tg5 = find_tg(5.0, grid_step=0.025)
    ok = 0.49 <= tg0.value <= 0.53 and 0.37 <= tg5.value <= 0.41 and tg5.value < tg0.value
    record(5, ok, f"t_g(0)={tg0.value:.4f}, t_g(5)={tg5.value:.4f}",
           time.perf_counter() - t0, 300)


def test_criterion_06_oracle_equivalence():
    t0 = time.perf_counter()
    worst_gain, worst_gap, failures = 0.0, 0.0, []
    for t, gamma, (r1, r2) in itertools.product(
        (-0.2, 0.0, 0.2, 0.6), (0.0, 5.0), ((0.3, 0.6), (0.1, 0.7))
    ):
        cfg = MarketConfig(r1, r2, t)
        eq = solve_quantum(cfg, GameParams(gamma))
        rep = verify_equilibrium(eq, cfg, gamma)
        points, agree = multi_start_iteration(cfg, gamma)
        target = candidate_strategies(eq, gamma)
        gap = max((max(abs(p[0] - target[0]), abs(p[1] - target[1])) for p in points),
                  default=math.inf)
        worst_gain = max(worst_gain, rep.max_deviation_gain)
        worst_gap = max(worst_gap, gap)
        if not (rep.agrees and agree and gap <= 1e-4):
            failures.append((r1, r2, t, gamma))
    ok = not failures
    record(6, ok, f"16 configs, max gain {worst_gain:.1e}, max iteration gap "
           f"{worst_gap:.1e}, failures {failures}", time.perf_counter() - t0, 120)


def test_criterion_07_benefit():
    t0 = time.perf_counter()

    def benefit(t, gamma):
        cfg = MarketConfig(0.3, 0.6, t)
        q = solve_quantum(cfg, GameParams(gamma)).profits
        c = solve_classical(cfg).profits
        return q[0] - c[0], q[1] - c[1]

    lowest = min(min(benefit(t, g)) for t in (0.0, 0.2, 0.6, 1.0) for g in (0.5, 1.0, 2.0, 5.0))
    g0 = benefit(0.0, 5.0)
    g4 = benefit(0.4, 5.0)
    g2 = benefit(2.0, 5.0)
    decay = max(g2[i] / g0[i] for i in (0, 1))
    ok = lowest >= -1e-9 and g0[0] == g0[1] and g4[1] > g4[0] and decay < 0.05
    record(7, ok, f"min benefit {lowest:.2e}, t=0 gap {g0[1] - g0[0]:.1e}, "
           f"t=0.4 G2-G1 {g4[1] - g4[0]:.2e}, t=2 ratio {decay:.3f}",
           time.perf_counter() - t0, 30)


def test_criterion_08_allowance():
    t0 = time.perf_counter()
    comp = compare_allowance(0.3, 0.6, 5.0, tol=1e-4)
    tq, tc = comp.quantum.value, comp.classical.value
    ok = comp.ordered and tq < tc < 0 and comp.witness_t is not None
    witness = (
        f"witness t={comp.witness_t:.4f} quantum profits "
        f"({comp.quantum_profits[0]:.4f}, {comp.quantum_profits[1]:.4f}) classical "
        f"({comp.classical_profits[0]:.4f}, {comp.classical_profits[1]:.4f})"
        if comp.witness_t is not None else "no witness"
    )
    record(8, ok, f"t_c^Q={tq:.4f} < t_c^C={tc:.4f} < 0; {witness}",
           time.perf_counter() - t0, 60)


def test_criterion_09_ordering_and_monotonicity():
    t0 = time.perf_counter()
    pos = ordering_report(0.2)
    neg = ordering_report(-0.2)
    aligned = pos.pattern == "aligned"
    reversed_profit = neg.reversed("profit")
    eqs = [solve_classical(MarketConfig(0.3, 0.6, t)) for t in (0.1, 0.2, 0.4, 0.6)]
    broken = []
    for name, field, up in (("p", "prices", True), ("q", "quantities", False),
                            ("profit", "profits", False)):
        for i in (0, 1):
            seq = [getattr(e, field)[i] for e in eqs]
            steps = zip(seq, seq[1:])
            if not all((b > a) if up else (b < a) for a, b in steps):
                broken.append(f"{name}{i + 1}={[round(v, 6) for v in seq]}")
    ok = aligned and reversed_profit and not broken
    record(9, ok, f"t=0.2 aligned={aligned}, t=-0.2 profit reversed={reversed_profit}, "
           f"non-monotone: {broken or 'none'}", time.perf_counter() - t0, 120)


def test_criterion_10_output_peak():
    t0 = time.perf_counter()
    a = aggregate_output_peak(0.2, 5.0)
    b = aggregate_output_peak(0.6, 5.0)
    ok = a.symmetric and b.symmetric and b.distance_from_centre < a.distance_from_centre
    record(10, ok, f"peak half-distance t=0.2 {a.distance_from_centre:.7f}, "
           f"t=0.6 {b.distance_from_centre:.7f} (grid cells ({a.r1}, {a.r2}), ({b.r1}, {b.r2}))",
           time.perf_counter() - t0, 120)
