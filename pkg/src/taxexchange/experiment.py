"""Equilibration, ensemble sampling and tax-rate sweeps."""
from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from ._rng import mix_seed
from .exceptions import (ConfigurationError, InsufficientDataError, InvariantViolation,
                         SweepPointError)
from .exchange_core import (ModelParams, PoorestFraction, UniformAll, check_conservation,
                            init_state, run_sweeps)
from .stats import (EmpiricalCCDF, TailFit, WealthHistogram, build_histogram, empirical_ccdf,
                    fit_exponential, fit_lognormal_slope, l1_distance, modal_wealth)

log = logging.getLogger(__name__)

EQUILIBRATION_WARN = 0.02
DRIFT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to reproduce one run.

    ``sample_sweeps`` is the length of the sampling window; a snapshot is taken
    every ``sample_interval_sweeps`` sweeps inside it.  ``bin_width`` is in
    units of the mean wealth ``W/N``.
    """

    params: ModelParams
    master_seed: int
    burn_in_sweeps: int = 2000
    sample_sweeps: int = 1000
    sample_interval_sweeps: int = 2
    n_realizations: int = 10
    bin_width: float = 0.05
    n_bins: int = 200

    def __post_init__(self):
        checks = {
            "burn_in_sweeps": self.burn_in_sweeps >= 0,
            "sample_sweeps": self.sample_sweeps >= 1,
            "sample_interval_sweeps": self.sample_interval_sweeps >= 1,
            "n_realizations": self.n_realizations >= 1,
            "bin_width": self.bin_width > 0 and math.isfinite(self.bin_width),
            "n_bins": self.n_bins >= 2,
        }
        for name, ok in checks.items():
            if not ok:
                raise ConfigurationError(f"{name} out of range: {getattr(self, name)!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigurationError(f"master_seed must be an unsigned 64-bit integer")

    @property
    def n_snapshots(self) -> int:
        return self.sample_sweeps // self.sample_interval_sweeps

    def new_histogram(self) -> WealthHistogram:
        return WealthHistogram(self.bin_width * self.params.mean_wealth, self.n_bins)

    def with_tax_rate(self, f: float) -> "SimulationConfig":
        return replace(self, params=replace(self.params, tax_rate=f))


@dataclass
class RunResult:
    tax_rate: float
    histogram: WealthHistogram
    ccdf: EmpiricalCCDF
    modal_wealth: float
    lognormal_fit: TailFit | None
    exponential_fit: TailFit | None
    block_distance: float
    conservation_drift: float

    @property
    def samples(self) -> int:
        return self.histogram.total_observations


@dataclass(frozen=True)
class SweepRow:
    f: float
    w_m: float
    lognormal_slope: float
    r_squared: float
    exponential_T: float
    samples: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    runs: list[RunResult] = field(default_factory=list, repr=False)

    @property
    def f(self) -> np.ndarray:
        return np.array([r.f for r in self.rows])

    @property
    def w_m(self) -> np.ndarray:
        return np.array([r.w_m for r in self.rows])

    @property
    def lognormal_slope(self) -> np.ndarray:
        return np.array([r.lognormal_slope for r in self.rows])


class Criterion(enum.Enum):
    MAX_MODE = "max_mode"
    MIN_SLOPE = "min_slope"


def realization_seed(master_seed: int, point_index: int, realization: int) -> int:
    """Stream seed of one realization: SplitMix64-finalizer mix of the three integers."""
    return mix_seed(master_seed, point_index, realization)


def _run_realization(config: SimulationConfig, point_index: int, realization: int):
    params = config.params
    state = init_state(params, realization_seed(config.master_seed, point_index, realization))
    run_sweeps(state, params, config.burn_in_sweeps)
    check_conservation(state, params.total_wealth, DRIFT_TOLERANCE)
    # two halves of the sampling window, kept apart for the stationarity diagnostic
    halves = (config.new_histogram(), config.new_histogram())
    n_snap = config.n_snapshots
    for s in range(n_snap):
        run_sweeps(state, params, config.sample_interval_sweeps)
        build_histogram(state.wealth, halves[0] if 2 * s < n_snap else halves[1])
    drift = check_conservation(state, params.total_wealth, DRIFT_TOLERANCE)
    return halves[0], halves[1], drift


def _map(fn, tasks, n_jobs):
    if n_jobs is None or n_jobs == 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def _assemble(config: SimulationConfig, parts) -> RunResult:
    first = config.new_histogram()
    second = config.new_histogram()
    drift = 0.0
    for a, b, d in parts:
        first = first + a
        second = second + b
        drift = max(drift, d)
    hist = first + second
    block = l1_distance(first, second) if second.total_observations else 0.0
    if block > EQUILIBRATION_WARN:
        log.warning("f=%g: sampling halves differ by L1 %.3g; run may not be stationary",
                    config.params.tax_rate, block)
    ccdf = empirical_ccdf(hist)
    w_m = modal_wealth(hist)
    try:
        lognormal = fit_lognormal_slope(ccdf, w_m)
    except InsufficientDataError:
        lognormal = None
    try:
        exponential = fit_exponential(ccdf)
    except InsufficientDataError:
        exponential = None
    return RunResult(config.params.tax_rate, hist, ccdf, w_m, lognormal, exponential,
                     block, drift)


def run_simulation(config: SimulationConfig, point_index: int = 0, n_jobs: int = 1) -> RunResult:
    """Run every realization of ``config`` and pool their snapshots.

    Realization ``r`` is seeded with ``realization_seed(master_seed,
    point_index, r)``; partial histograms are merged in realization order, so
    the result does not depend on ``n_jobs``.
    """
    tasks = [(config, point_index, r) for r in range(config.n_realizations)]
    return _assemble(config, _map(_run_realization, tasks, n_jobs))


def sweep_tax(config: SimulationConfig, f_values, n_jobs: int = 1) -> SweepResult:
    """One :func:`run_simulation` per tax rate, rows sorted by ``f``.

    Point ``k`` of the sorted grid uses seed index ``k``.  Failures are
    re-raised as :class:`SweepPointError` naming the tax rate.
    """
    f_values = sorted(float(f) for f in f_values)
    if not f_values:
        raise ConfigurationError("tax grid is empty")
    for f in f_values:
        if not 0.0 <= f <= 1.0:
            raise ConfigurationError(f"tax rate {f!r} outside [0, 1]")
    configs = [config.with_tax_rate(f) for f in f_values]
    tasks = [(k, r) for k in range(len(configs)) for r in range(config.n_realizations)]

    def work(k, r):
        try:
            return _run_realization(configs[k], k, r)
        except Exception as exc:
            raise SweepPointError(f_values[k], exc) from exc

    parts = _map(work, tasks, n_jobs)
    runs, rows = [], []
    for k, cfg in enumerate(configs):
        chunk = parts[k * config.n_realizations:(k + 1) * config.n_realizations]
        try:
            run = _assemble(cfg, chunk)
        except Exception as exc:
            raise SweepPointError(f_values[k], exc) from exc
        runs.append(run)
        rows.append(_row(run))
    return SweepResult(rows, runs)


def _row(run: RunResult) -> SweepRow:
    nan = float("nan")
    ln, ex = run.lognormal_fit, run.exponential_fit
    return SweepRow(
        f=run.tax_rate,
        w_m=run.modal_wealth,
        lognormal_slope=ln.slope if ln else nan,
        r_squared=ln.r_squared if ln else nan,
        exponential_T=ex.temperature if ex else nan,
        samples=run.samples,
    )


def find_optimal_tax(sweep: SweepResult, criterion=Criterion.MAX_MODE) -> float:
    """Grid tax rate maximising ``w_m`` or minimising the log-normal slope.

    Ties go to the smaller ``f``; no interpolation between grid points.
    """
    criterion = Criterion(criterion)
    if not sweep.rows:
        raise ValueError("empty sweep")
    if criterion is Criterion.MAX_MODE:
        values = sweep.w_m
        best = np.max(values)
    else:
        values = sweep.lognormal_slope
        if np.isnan(values).any():
            bad = [r.f for r in sweep.rows if math.isnan(r.lognormal_slope)]
            raise InsufficientDataError(f"no log-normal fit at f={bad}")
        best = np.min(values)
    # rows are sorted by f, so the first hit is the smallest tax rate
    return float(sweep.rows[int(np.flatnonzero(values == best)[0])].f)


def equilibration_check(state, params: ModelParams, block_sweeps: int,
                        bin_width: float = 0.05, n_bins: int = 200) -> float:
    """Advance ``state`` by two blocks and return the L1 distance of their histograms.

    One snapshot per sweep; ``bin_width`` is in units of ``W/N``.  Values above
    ``EQUILIBRATION_WARN`` suggest the economy is still relaxing.
    """
    if block_sweeps < 1:
        raise ValueError("block_sweeps must be >= 1")
    blocks = []
    for _ in range(2):
        hist = WealthHistogram(bin_width * params.mean_wealth, n_bins)
        for _ in range(block_sweeps):
            run_sweeps(state, params, 1)
            build_histogram(state.wealth, hist)
        blocks.append(hist)
    return l1_distance(*blocks)


def make_policy(policy: str = "uniform_all", poorest_fraction: float = 0.2):
    if policy == "uniform_all":
        return UniformAll()
    if policy == "poorest":
        return PoorestFraction(poorest_fraction)
    raise ConfigurationError(f"unknown policy {policy!r} (expected uniform_all or poorest)")


class TaxedExchangeModel(BaseEstimator):
    """Estimator wrapper: ``fit`` runs the ensemble simulation for one tax rate.

    Hyper-parameters mirror :class:`SimulationConfig`, so the model can be
    cloned and driven by scikit-learn parameter grids.  Wealth is expressed
    in units of the mean (``W = N``).
    """

    def __init__(self, n_agents=1000, tax_rate=0.0, policy="uniform_all",
                 poorest_fraction=0.2, burn_in_sweeps=2000, sample_sweeps=1000,
                 sample_interval_sweeps=2, n_realizations=10, bin_width=0.05, n_bins=200,
                 random_state=0, n_jobs=1):
        self.n_agents = n_agents
        self.tax_rate = tax_rate
        self.policy = policy
        self.poorest_fraction = poorest_fraction
        self.burn_in_sweeps = burn_in_sweeps
        self.sample_sweeps = sample_sweeps
        self.sample_interval_sweeps = sample_interval_sweeps
        self.n_realizations = n_realizations
        self.bin_width = bin_width
        self.n_bins = n_bins
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self) -> SimulationConfig:
        params = ModelParams(self.n_agents, float(self.n_agents), self.tax_rate,
                             make_policy(self.policy, self.poorest_fraction))
        return SimulationConfig(params, self.random_state, self.burn_in_sweeps,
                                self.sample_sweeps, self.sample_interval_sweeps,
                                self.n_realizations, self.bin_width, self.n_bins)

    def fit(self, X=None, y=None):
        """Simulate; ``X`` and ``y`` are ignored."""
        self.result_ = run_simulation(self._config(), n_jobs=self.n_jobs)
        self.histogram_ = self.result_.histogram
        self.modal_wealth_ = self.result_.modal_wealth
        fit = self.result_.lognormal_fit
        self.lognormal_slope_ = fit.slope if fit else float("nan")
        fit = self.result_.exponential_fit
        self.temperature_ = fit.temperature if fit else float("nan")
        return self

    def score(self, X=None, y=None):
        """Modal wealth of the fitted run (larger is more egalitarian)."""
        return self.modal_wealth_
