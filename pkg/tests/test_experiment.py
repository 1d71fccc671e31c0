import logging

import numpy as np
import pytest
from sklearn.base import clone

from taxexchange import (ConfigurationError, InsufficientDataError, ModelParams,
                         PoorestFraction, SimulationConfig, SweepPointError, SweepResult,
                         SweepRow, TaxedExchangeModel, equilibration_check, find_optimal_tax,
                         init_state, run_simulation, run_sweeps, sweep_tax)
from taxexchange.experiment import Criterion, _run_realization, realization_seed
from taxexchange.output import sweep_table


def small_config(f=0.2, policy=None, **kw):
    params = ModelParams(100, 100.0, f, policy or PoorestFraction(1.0))
    base = dict(burn_in_sweeps=20, sample_sweeps=20, sample_interval_sweeps=2, n_realizations=3)
    base.update(kw)
    return SimulationConfig(params, 99, **base)


def row(f, w_m, slope=-1.0):
    return SweepRow(f, w_m, slope, 0.9, 1.0, 10)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        small_config(sample_interval_sweeps=0)
    with pytest.raises(ConfigurationError):
        small_config(n_realizations=0)
    assert small_config(sample_sweeps=21, sample_interval_sweeps=2).n_snapshots == 10


def test_realization_seeds_distinct():
    seeds = {realization_seed(7, k, r) for k in range(20) for r in range(10)}
    assert len(seeds) == 200


def test_snapshot_count():
    cfg = small_config()
    result = run_simulation(cfg)
    assert result.samples == cfg.n_realizations * cfg.n_snapshots * cfg.params.n_agents
    assert result.conservation_drift <= 1e-9


def test_pooled_histogram_is_merge_of_realizations():
    cfg = small_config()
    result = run_simulation(cfg)
    manual = cfg.new_histogram()
    for r in range(cfg.n_realizations):
        a, b, _ = _run_realization(cfg, 0, r)
        manual = manual + a + b
    assert manual == result.histogram


def test_thread_count_does_not_change_results():
    cfg = small_config(n_realizations=4)
    a = run_simulation(cfg, n_jobs=1)
    b = run_simulation(cfg, n_jobs=3)
    assert a.histogram == b.histogram
    assert a.modal_wealth == b.modal_wealth


def test_same_seed_same_result_other_seed_differs():
    cfg = small_config()
    assert run_simulation(cfg).histogram == run_simulation(cfg).histogram
    other = SimulationConfig(cfg.params, 100, 20, 20, 2, 3)
    assert run_simulation(other).histogram != run_simulation(cfg).histogram


def test_sweep_single_point_equals_run():
    cfg = small_config()
    sweep = sweep_tax(cfg, [0.2])
    assert sweep.runs[0].histogram == run_simulation(cfg.with_tax_rate(0.2)).histogram


def test_sweep_sorted_and_parallel_invariant():
    cfg = small_config(policy=PoorestFraction(0.2))
    a = sweep_tax(cfg, [0.5, 0.0, 0.25])
    b = sweep_tax(cfg, [0.0, 0.25, 0.5], n_jobs=2)
    assert a.f.tolist() == [0.0, 0.25, 0.5]
    assert sweep_table(a) == sweep_table(b)


def test_sweep_rejects_bad_grid():
    with pytest.raises(ConfigurationError):
        sweep_tax(small_config(), [])
    with pytest.raises(ConfigurationError):
        sweep_tax(small_config(), [0.1, 1.5])


def test_sweep_point_error_names_tax_rate(monkeypatch):
    import taxexchange.experiment as ex

    real = ex.run_sweeps

    def broken(state, params, n):
        if params.tax_rate == 0.3:
            raise RuntimeError("boom")
        return real(state, params, n)

    monkeypatch.setattr(ex, "run_sweeps", broken)
    with pytest.raises(SweepPointError) as info:
        sweep_tax(small_config(), [0.1, 0.3])
    assert info.value.tax_rate == 0.3


def test_optimum_examples():
    sweep = SweepResult([row(0.0, 0.1, -1.0), row(0.1, 0.5, -3.0), row(0.2, 0.3, -2.0)])
    assert find_optimal_tax(sweep, Criterion.MAX_MODE) == 0.1
    assert find_optimal_tax(sweep, "min_slope") == 0.1


def test_optimum_ties_go_to_smaller_f():
    sweep = SweepResult([row(0.0, 0.1), row(0.1, 0.6), row(0.2, 0.6), row(0.3, 0.2)])
    assert find_optimal_tax(sweep) == 0.1


def test_optimum_needs_all_slopes():
    sweep = SweepResult([row(0.0, 0.1), row(0.1, 0.2, float("nan"))])
    with pytest.raises(InsufficientDataError):
        find_optimal_tax(sweep, Criterion.MIN_SLOPE)
    assert find_optimal_tax(sweep, Criterion.MAX_MODE) == 0.1


def test_equilibration_check_bounds():
    params = ModelParams(200, 200.0, 0.0)
    frozen = ModelParams(200, 200.0, 0.0)
    state = init_state(frozen, 1)
    d = equilibration_check(state, params, 5)
    assert 0.0 <= d <= 2.0
    with pytest.raises(ValueError):
        equilibration_check(state, params, 0)


def test_equilibration_settles_at_zero_tax():
    params = ModelParams(1000, 1000.0, 0.0)
    state = init_state(params, 3)
    run_sweeps(state, params, 1000)
    assert equilibration_check(state, params, 1000) < 0.02


def test_unsettled_run_warns(caplog):
    cfg = small_config(burn_in_sweeps=0, sample_sweeps=4, sample_interval_sweeps=1)
    with caplog.at_level(logging.WARNING, logger="taxexchange"):
        result = run_simulation(cfg)
    assert result.block_distance > 0.02
    assert "stationary" in caplog.text


def test_estimator_wrapper():
    model = TaxedExchangeModel(n_agents=100, tax_rate=0.3, burn_in_sweeps=20, sample_sweeps=20,
                               n_realizations=2, random_state=5)
    params = model.get_params()
    assert params["tax_rate"] == 0.3 and params["random_state"] == 5
    twin = clone(model)
    model.fit()
    twin.fit(np.zeros((3, 1)))
    assert model.histogram_ == twin.histogram_
    assert model.score() == model.modal_wealth_ > 0
    with pytest.raises(ConfigurationError):
        clone(model).set_params(policy="richest").fit()
