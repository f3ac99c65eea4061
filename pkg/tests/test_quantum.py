import math

import pytest

from hotelling_cournot import (
    GameParams,
    MarketConfig,
    central_limit_classical,
    central_limit_quantum,
    classical_foc_residual,
    quantum_benefit,
    quantum_foc_residual,
    quantum_quantities,
    solve_classical,
    solve_quantum,
    strategies_from_quantities,
)
from hotelling_cournot.classical import Branch

C5, S5 = math.cosh(5.0), math.sinh(5.0)


def test_quantities_frozen():
    assert quantum_quantities((0.2, 0.1), 1.0) == pytest.approx(
        (0.426136246, 0.389348302), abs=1e-9
    )


def test_quantities_identity_at_zero():
    assert quantum_quantities((0.2, 0.1), 0.0) == (0.2, 0.1)


def test_equal_strategies_scale_by_exp():
    q = quantum_quantities((0.1, 0.1), 2.0)
    assert q == pytest.approx((0.1 * math.exp(2.0),) * 2, rel=1e-14)


def test_strategy_recovery():
    x, negative = strategies_from_quantities((0.25, 0.25), 5.0)
    assert x == pytest.approx((0.25 * math.exp(-5.0),) * 2, rel=1e-9)
    assert x[0] == pytest.approx(0.0016845, abs=1e-7)
    assert not negative
    _, negative = strategies_from_quantities((0.2, 0.3), 5.0)
    assert negative


def test_residual_reduces_to_classical():
    cfg = MarketConfig(0.2, 0.7, 0.3)
    for p in [(0.3, 0.35), (0.4, 0.2), (0.5, 0.45)]:
        assert quantum_foc_residual(p, cfg, 0.0) == pytest.approx(
            classical_foc_residual(p, cfg), abs=1e-12
        )


def test_frozen_equilibrium_gamma_5(cfg):
    eq = solve_quantum(cfg, GameParams(5.0))
    assert eq.converged
    assert eq.prices == pytest.approx((0.479051122, 0.491078359), abs=1e-9)
    assert eq.quantities == pytest.approx((0.237848483, 0.247166233), abs=1e-9)
    assert eq.strategies == pytest.approx((-0.689804377, 0.693072381), abs=1e-8)
    assert eq.negative_strategy
    assert any("negative strategy" in d for d in eq.diagnostics)


def test_frozen_equilibrium_gamma_1(cfg):
    eq = solve_quantum(cfg, GameParams(1.0))
    assert eq.prices == pytest.approx((0.453620818, 0.465632560), abs=1e-9)
    assert eq.strategies == pytest.approx((0.079785940, 0.107999252), abs=1e-9)
    assert not eq.negative_strategy


def test_strategies_map_back(cfg):
    eq = solve_quantum(cfg, GameParams(2.0))
    assert quantum_quantities(eq.strategies, 2.0) == pytest.approx(eq.quantities, abs=1e-12)


def test_t_zero_closed_form():
    eq = solve_quantum(MarketConfig(0.3, 0.6, 0.0), GameParams(5.0))
    assert eq.branch is Branch.T_ZERO
    q = C5 / (3 * C5 + S5)
    assert eq.quantities == pytest.approx((q, q), abs=1e-15)
    assert q == pytest.approx(0.250005675, abs=1e-9)
    assert eq.prices[0] == pytest.approx(math.exp(5.0) / (3 * C5 + S5), abs=1e-15)
    assert sum(eq.profits) == pytest.approx(0.25, abs=1e-4)


def test_monopoly_limit():
    eq = solve_quantum(MarketConfig(0.3, 0.6, 0.0), GameParams(20.0))
    assert abs(sum(eq.profits) - 0.25) < 1e-8


def test_gamma_zero_equals_classical(cfg):
    a = solve_quantum(cfg, GameParams(0.0))
    b = solve_classical(cfg)
    assert a.prices == b.prices
    assert a.quantities == b.quantities


def test_central_limit_reduces_to_classical():
    for t in (0.0, 0.2, 0.6):
        assert central_limit_quantum(t, 0.0) == pytest.approx(central_limit_classical(t), abs=1e-15)


def test_central_limit_frozen():
    q, p = central_limit_quantum(0.0, 1.0)
    assert q == pytest.approx(math.cosh(1) / (3 * math.cosh(1) + math.sinh(1)), abs=1e-15)
    assert (q, p) == pytest.approx((0.265844735, 0.468310531), abs=1e-9)
    assert central_limit_quantum(0.2, 5.0) == pytest.approx((0.237504529, 0.474990943), abs=1e-9)


@pytest.mark.parametrize("gamma", [1.0, 5.0])
@pytest.mark.parametrize("t", [0.1, 0.2, 0.4, 0.6])
def test_central_limit_matches_solver(t, gamma):
    q, p = central_limit_quantum(t, gamma)
    eq = solve_quantum(MarketConfig(0.4995, 0.5005, t), GameParams(gamma))
    assert eq.quantities[0] == pytest.approx(q, abs=5e-3)
    assert eq.prices[0] == pytest.approx(p, abs=5e-3)


def test_benefit_zero_at_gamma_zero(cfg):
    assert quantum_benefit(cfg, 0.0) == (0.0, 0.0)


def test_benefit_t_zero():
    g = quantum_benefit(MarketConfig(0.3, 0.6, 0.0), 5.0)
    assert g[0] == pytest.approx(g[1], abs=1e-15)
    assert g[0] == pytest.approx(0.125 - 1 / 9, abs=1e-5)


def test_symmetric_locations_equal_profits():
    eq = solve_quantum(MarketConfig(0.25, 0.75, 0.4), GameParams(3.0))
    assert eq.profits[0] == pytest.approx(eq.profits[1], abs=1e-9)


def test_gamma_validation():
    with pytest.raises(ValueError):
        GameParams(-1.0)
    with pytest.raises(ValueError):
        GameParams(math.inf)


def test_peripheral_firm_gains_more():
    # entanglement narrows the profit gap between the firms
    g = quantum_benefit(MarketConfig(0.3, 0.6, 0.4), 5.0)
    assert g == pytest.approx((0.006816551, 0.004604321), abs=1e-9)
    g = quantum_benefit(MarketConfig(0.45, 0.6, 0.4), 5.0)
    assert g[1] > g[0]


def test_benefit_decays_with_transport():
    g0 = quantum_benefit(MarketConfig(0.3, 0.6, 0.0), 5.0)
    g2 = quantum_benefit(MarketConfig(0.3, 0.6, 2.0), 5.0)
    assert all(b < 0.05 * a for a, b in zip(g0, g2))
