import pytest

from hotelling_cournot import MarketConfig, solve_classical
from hotelling_cournot.analysis import (
    Axis,
    SweepSpec,
    aggregate_output_peak,
    centre_advantage,
    compare_allowance,
    find_critical_allowance,
    find_tg,
    grid_values,
    location_grid,
    location_incentive,
    ordering_report,
    run_sweep,
)
from hotelling_cournot.errors import ThresholdError


def test_grid_values_exact():
    assert grid_values(0.05, 0.5, 0.05)[-1] == 0.5
    assert len(grid_values(0.05, 0.5, 0.05)) == 10
    assert grid_values(0.1, 0.3, 0.1) == (0.1, 0.2, 0.3)


def test_location_grid():
    r1, r2 = location_grid(0.025)
    assert r1[0] == 0.025 and r1[-1] == 0.5
    assert r2[0] == 0.5 and r2[-1] == 0.975


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis("r1", 0.1, 0.5, 0.0)
    with pytest.raises(ValueError):
        Axis("rho", 0.1, 0.5, 0.1)
    with pytest.raises(ValueError):
        SweepSpec(Axis("t", 0, 1, 0.5), Axis("t", 0, 1, 0.5))
    with pytest.raises(ValueError):
        SweepSpec(Axis("t", 0, 1, 0.5), Axis("gamma", 0, 1, 0.5), fixed={"t": 0.1})


def test_single_cell_sweep_equals_solve():
    spec = SweepSpec(Axis("r1", 0.3, 0.3, 0.1), Axis("r2", 0.6, 0.6, 0.1), {"t": 0.2})
    res = run_sweep(spec)
    (cell,) = list(res)
    assert cell.equilibrium == solve_classical(MarketConfig(0.3, 0.6, 0.2))


def test_location_sweep_wedge_and_mirror():
    spec = SweepSpec(Axis("r1", 0.3, 0.5, 0.1), Axis("r2", 0.5, 0.7, 0.1), {"t": 0.2})
    res = run_sweep(spec)
    assert res.cells[2][0] is None  # r1 = r2 = 0.5
    swapped = res.transposed()
    for cell, mirror in zip(res, swapped):
        src = solve_classical(
            MarketConfig(1 - cell.params["r2"], 1 - cell.params["r1"], 0.2)
        )
        assert mirror.equilibrium.profits == pytest.approx(src.profits[::-1], abs=1e-12)
        assert cell.equilibrium.profits == pytest.approx(
            mirror.equilibrium.profits, abs=1e-11
        )


def test_sweep_records_failures():
    spec = SweepSpec(Axis("t", -1.3, -1.2, 0.1), Axis("r2", 0.5, 0.55, 0.05), {"r1": 0.45})
    res = run_sweep(spec)
    cells = list(res)
    assert len(cells) == 4
    assert any(c.error is not None for c in cells)
    assert res.field("profit").shape == (2, 2)


def test_benefit_surface_peaks_at_zero_transport():
    spec = SweepSpec(Axis("t", 0.0, 1.0, 0.25), Axis("gamma", 1.0, 5.0, 2.0),
                     {"r1": 0.3, "r2": 0.6}, quantity="benefit")
    res = run_sweep(spec)
    benefit = res.field("benefit", firm=1)
    assert (benefit[0] >= benefit[1:]).all()


def test_location_incentive_frozen():
    assert location_incentive(0.5, 0.525, 0.3) > 0
    assert location_incentive(0.5, 0.525, 0.6) < 0
    # mirror: firm 2 at (r1, r2) equals firm 1 at (1 - r2, 1 - r1)
    a = location_incentive(0.3, 0.6, 0.4, firm=2)
    b = location_incentive(0.4, 0.7, 0.4, firm=1)
    assert a == pytest.approx(b, abs=1e-8)


def test_centre_advantage_reports_cell():
    ok, cell = centre_advantage(0.8, 0.0, 0.1)
    assert not ok and cell[0] == 0.5


def test_find_tg_coarse():
    res = find_tg(0.0, grid_step=0.05, tol=1e-3)
    assert res.bracket[1] - res.bracket[0] <= 1e-3
    assert res.bracket[0] <= res.value <= res.bracket[1]
    assert centre_advantage(res.bracket[0], 0.0, 0.05)[0]
    assert not centre_advantage(res.bracket[1], 0.0, 0.05)[0]
    assert res.value == pytest.approx(0.5255, abs=1e-3)


def test_find_tg_validation():
    with pytest.raises(ValueError):
        find_tg(0.0, grid_step=0.3)
    with pytest.raises(ThresholdError):
        find_tg(0.0, grid_step=0.05, t_lo=0.05, t_hi=0.1)


def test_critical_allowance_classical():
    res = find_critical_allowance(0.3, 0.6, 0.0, tol=1e-3)
    assert res.value == pytest.approx(-0.9161, abs=2e-3)
    assert res.reason == "profit"
    per_firm = find_critical_allowance(0.3, 0.6, 0.0, tol=1e-3, firm=1)
    assert per_firm.value <= res.value


def test_critical_allowance_no_crossing():
    with pytest.raises(ThresholdError):
        find_critical_allowance(0.3, 0.6, 0.0, bracket=(-0.5, 0.0))


def test_compare_allowance():
    comp = compare_allowance(0.3, 0.6, 5.0, tol=1e-3)
    assert comp.ordered
    assert comp.quantum.reason == "second_order"
    assert min(comp.quantum_profits) > 0 > min(comp.classical_profits)


def test_ordering_positive_t():
    rep = ordering_report(0.2)
    assert rep.pattern == "aligned"
    assert rep.symmetric_ties
    assert rep.compared == 90


def test_ordering_negative_t():
    rep = ordering_report(-0.2)
    assert rep.reversed("profit")
    assert rep.pattern == "reversed"


def test_output_peak_flat_at_zero():
    peak = aggregate_output_peak(0.0, 5.0)
    assert peak.flat and peak.refined is None


def test_output_peak_classical_moves_inward():
    a = aggregate_output_peak(0.2, 0.0, 0.05)
    b = aggregate_output_peak(0.6, 0.0, 0.05)
    assert a.symmetric and b.symmetric
    assert a.refined[0] == pytest.approx(0.5 - 0.2330, abs=1e-3)
    assert b.distance_from_centre < a.distance_from_centre
