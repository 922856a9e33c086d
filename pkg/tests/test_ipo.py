"""Golden-section tuner, convergence probability surfaces, Pareto scan."""
import math

import numpy as np
import pytest

from eonpower import (IpoConfig, ParetoPoint, PressureFunction, cpos_ps1,
                      cpos_ps2, make_objective, pareto_frontier,
                      select_tradeoff, tune_inputs, tune_parameter)
from eonpower.ipo import GOLDEN, SUCCESS_THRESHOLD, _golden_pass


def test_golden_ratio_constant():
    assert GOLDEN == (1.0 + math.sqrt(5.0)) / 2.0
    assert SUCCESS_THRESHOLD == 0.94


def test_golden_pass_quadratic():
    mid = _golden_pass(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-8, GOLDEN)
    assert abs(mid - 0.3) < 1e-8


def test_golden_pass_shrinks_by_inverse_golden():
    # one update leaves a bracket of width exactly 1/golden
    mid = _golden_pass(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 0.7, GOLDEN)
    assert abs(mid - 0.5 / GOLDEN) < 1e-12


def test_tune_parameter_boxes():
    config = IpoConfig(n_loops=1, n_realizations=1, tol_r0=1e-7,
                       tol_omega=1e-7)
    r0 = tune_parameter("r0", 1.0, lambda r, w: (math.log10(r) + 3.0) ** 2,
                        config)
    assert abs(math.log10(r0) + 3.0) < 1e-6
    omega = tune_parameter("omega", 1e-3,
                           lambda r, w: (w - 0.3) ** 2, config)
    assert abs(omega - 0.3) < 1e-6
    with pytest.raises(ValueError):
        tune_parameter("gamma", 1.0, lambda r, w: 0.0, config)


def test_tune_parameter_rejects_non_finite():
    config = IpoConfig(n_loops=1, n_realizations=1)
    with pytest.raises(RuntimeError, match="returned"):
        tune_parameter("omega", 1.0, lambda r, w: float("nan"), config)


def test_ipo_config_validation():
    with pytest.raises(ValueError):
        IpoConfig(n_loops=0)
    with pytest.raises(ValueError):
        IpoConfig(n_realizations=0)
    with pytest.raises(ValueError):
        IpoConfig(omega_bounds=(2.0, 1.0))
    with pytest.raises(ValueError):
        IpoConfig(golden=1.0)


def test_make_objective_deterministic(model):
    objective = make_objective(lambda: PressureFunction(model),
                               n_realizations=2, n_parcels=8,
                               n_iterations=10, variant="chaotic")
    a = objective(1e-5, 1.0)
    assert a == objective(1e-5, 1.0)
    assert np.isfinite(a) and a > 0


def test_tune_inputs_history(model):
    objective = make_objective(lambda: PressureFunction(model),
                               n_realizations=1, n_parcels=6, n_iterations=8)
    config = IpoConfig(n_loops=2, n_realizations=1, tol_r0=1.0,
                       tol_omega=0.5)
    r0, omega, history = tune_inputs(objective, config)
    assert 1e-10 <= r0 <= 1e2
    assert 1e-4 * math.pi <= omega <= 2.0 * math.pi
    assert [row["loop"] for row in history] == [1, 2]
    assert history[-1]["r0"] == r0 and history[-1]["omega"] == omega


# -------------------------------------------------------------------- CPoS

def test_cpos_ps1_lattice(model):
    table = cpos_ps1(lambda: PressureFunction(model), r0_grid=[5e-6, 1e-8],
                     iteration_grid=[0, 30], omega=1.6975,
                     n_realizations=4, n_parcels=16)
    assert table.shape == (2, 2)
    assert np.all((table >= 0.0) & (table <= 1.0))
    scaled = table * 4
    np.testing.assert_allclose(scaled, np.round(scaled), atol=1e-12)
    # the zero-iteration column scores the untouched starting point
    assert table[0, 0] == 0.0 and table[1, 0] == 0.0


def test_cpos_ps1_prefix_property(model):
    factory = lambda: PressureFunction(model)
    short = cpos_ps1(factory, r0_grid=[5e-6], iteration_grid=[40],
                     omega=1.6975, n_realizations=3, n_parcels=24)
    both = cpos_ps1(factory, r0_grid=[5e-6], iteration_grid=[40, 80],
                    omega=1.6975, n_realizations=3, n_parcels=24)
    # one run per (radius, seed) at the longest budget; shorter
    # checkpoints read earlier rows of the same orbit
    assert both[0, 0] == short[0, 0]


def test_cpos_ps1_input_errors(model):
    factory = lambda: PressureFunction(model)
    with pytest.raises(ValueError, match="empty"):
        cpos_ps1(factory, r0_grid=[], iteration_grid=[10], omega=1.0,
                 n_realizations=2)
    with pytest.raises(ValueError, match="nonnegative"):
        cpos_ps1(factory, r0_grid=[1e-6], iteration_grid=[-5], omega=1.0,
                 n_realizations=2)


def test_cpos_ps2_degenerate_cells(model):
    calls = []

    def factory():
        calls.append(1)
        return PressureFunction(model)

    table = cpos_ps2(factory, parcel_grid=[0, 12], iteration_grid=[0, 25],
                     r0=5.8318e-6, omega=1.6975, n_realizations=2)
    assert table.shape == (2, 2)
    np.testing.assert_array_equal(table[0], [0.0, 0.0])  # no parcels
    assert table[1, 0] == 0.0                            # no iterations
    # the empty-parcel row never spends a run
    assert len(calls) == 2


# ------------------------------------------------------------------ Pareto

def test_pareto_staircase():
    surface = np.array([[0.0, 0.0, 1.0],
                        [0.0, 1.0, 1.0],
                        [1.0, 1.0, 1.0]])
    points = pareto_frontier([10, 20, 30], [100, 200, 300], surface,
                             flop_fn=lambda k, nf: k * nf)
    trail = [(p.n_parcels, p.n_iterations) for p in points]
    assert trail == [(10, 300), (20, 200), (30, 100)]
    assert points[0].success == 1.0
    assert points[0].flops == 10 * 300


def test_pareto_keeps_cheapest_column_picks():
    points = pareto_frontier([10, 20], [100, 200], np.ones((2, 2)),
                             flop_fn=lambda k, nf: k * nf)
    assert [(p.n_parcels, p.n_iterations) for p in points] == \
        [(10, 200), (10, 100)]
    assert select_tradeoff(points).n_iterations == 100


def test_pareto_empty_and_mismatch():
    flop_fn = lambda k, nf: 1.0
    assert pareto_frontier([5, 6], [10, 20], np.zeros((2, 2)), flop_fn) == []
    with pytest.raises(ValueError, match="surface"):
        pareto_frontier([5, 6, 7], [10, 20], np.zeros((2, 2)), flop_fn)


def test_pareto_point_is_frozen():
    point = ParetoPoint(n_parcels=5, n_iterations=10, success=1.0,
                        flops=123.0)
    with pytest.raises(AttributeError):
        point.flops = 0.0


def test_select_tradeoff_minimizes_flops():
    points = [ParetoPoint(5, 10, 1.0, 500.0), ParetoPoint(9, 4, 1.0, 200.0)]
    assert select_tradeoff(points).flops == 200.0
    with pytest.raises(ValueError, match="empty"):
        select_tradeoff([])


# ----------------------------------------------------------------- tuning

def test_tuned_inputs_match_shipped_operating_point(model):
    """Full-budget tuning lands near the shipped defaults: r0 within an
    order of magnitude, omega within half a radian.

    Slowish (~15 s): three seeded 132x180 searches per probe over two
    refinement loops, all deterministic.
    """
    objective = make_objective(lambda: PressureFunction(model),
                               n_realizations=3, n_parcels=132,
                               n_iterations=180, variant="chaotic")
    r0, omega, _ = tune_inputs(objective,
                               IpoConfig(n_loops=2, n_realizations=3))
    assert 5.8318e-7 <= r0 <= 5.8318e-5
    assert abs(omega - 1.6975) <= 0.5
