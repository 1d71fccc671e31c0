"""Economy state and the taxed two-step trade.

A trade picks two agents, splits their pooled wealth by a random fraction
after withholding a tax, and hands the withheld amount to a beneficiary set
in equal shares.  Total wealth is conserved up to floating-point rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from ._rng import draw_pair, next_double, seed_state
from .exceptions import ConfigurationError, InvariantViolation


@dataclass(frozen=True)
class UniformAll:
    """Every agent receives an equal share of the tax pool."""

    def n_beneficiaries(self, n_agents: int) -> int:
        return n_agents


@dataclass(frozen=True)
class PoorestFraction:
    """The poorest ``fraction`` of agents share the tax pool.

    The set is ``max(1, floor(fraction * N))`` agents, ranked on the wealth
    vector after the traders have paid their tax.
    """

    fraction: float

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigurationError(
                f"poorest_fraction must lie in (0, 1], got {self.fraction!r}")

    def n_beneficiaries(self, n_agents: int) -> int:
        # tolerance keeps 0.2 * 1000 at 200 despite binary rounding
        return max(1, math.floor(self.fraction * n_agents + 1e-9))


RedistributionPolicy = Union[UniformAll, PoorestFraction]


@dataclass(frozen=True)
class ModelParams:
    n_agents: int
    total_wealth: float
    tax_rate: float
    policy: RedistributionPolicy = field(default_factory=UniformAll)

    def __post_init__(self):
        if isinstance(self.n_agents, bool) or int(self.n_agents) != self.n_agents:
            raise ConfigurationError(f"n_agents must be an integer, got {self.n_agents!r}")
        if self.n_agents < 2:
            raise ConfigurationError(f"n_agents must be >= 2, got {self.n_agents}")
        if not (math.isfinite(self.total_wealth) and self.total_wealth > 0):
            raise ConfigurationError(f"total_wealth must be > 0, got {self.total_wealth!r}")
        if not 0.0 <= self.tax_rate <= 1.0:
            raise ConfigurationError(f"tax_rate must lie in [0, 1], got {self.tax_rate!r}")
        if not isinstance(self.policy, (UniformAll, PoorestFraction)):
            raise ConfigurationError(f"unknown redistribution policy {self.policy!r}")

    @property
    def mean_wealth(self) -> float:
        return self.total_wealth / self.n_agents

    @property
    def n_beneficiaries(self) -> int:
        return self.policy.n_beneficiaries(self.n_agents)


@dataclass
class EconomyState:
    """Wealth vector, trade clock and generator state of one economy.

    Not safe for concurrent mutation; copy it (:meth:`copy`) to branch.
    """

    wealth: np.ndarray
    time: int
    rng: np.ndarray

    def copy(self) -> "EconomyState":
        return EconomyState(self.wealth.copy(), self.time, self.rng.copy())

    @property
    def n_agents(self) -> int:
        return self.wealth.size

    def total(self) -> float:
        """Total wealth with compensated summation."""
        return math.fsum(self.wealth)


@dataclass(frozen=True)
class TradeOutcome:
    i: int
    j: int
    epsilon: float
    pool: float
    beneficiaries: np.ndarray


def init_state(params: ModelParams, seed: int) -> EconomyState:
    """Equal shares ``W/N`` for everybody, clock at zero, stream seeded from ``seed``."""
    if not isinstance(params, ModelParams):
        raise ConfigurationError("params must be a ModelParams instance")
    wealth = np.full(params.n_agents, params.mean_wealth, dtype=np.float64)
    return EconomyState(wealth=wealth, time=0, rng=seed_state(seed))


def sample_pair(state: EconomyState) -> tuple[int, int]:
    """Draw an ordered pair ``i != j``, each unordered pair equally likely.

    ``i`` is uniform over all agents and ``j`` uniform over the other ``N-1``
    (no rejection: a draw ``j >= i`` is shifted up by one).
    """
    i, j = draw_pair(state.rng, state.n_agents)
    return int(i), int(j)


def exchange(w_i: float, w_j: float, epsilon: float, f: float) -> tuple[float, float, float]:
    """Taxed split of ``w_i + w_j``: returns ``(w_i', w_j', pool)``."""
    if w_i < 0 or w_j < 0:
        raise InvariantViolation(f"negative wealth in exchange: {w_i!r}, {w_j!r}")
    if not (0.0 <= epsilon <= 1.0 and 0.0 <= f <= 1.0):
        raise InvariantViolation(f"epsilon={epsilon!r} and f={f!r} must lie in [0, 1]")
    total = w_i + w_j
    keep = 1.0 - f
    return keep * epsilon * total, keep * (1.0 - epsilon) * total, f * total


def select_beneficiaries(wealth_after_tax, policy: RedistributionPolicy) -> np.ndarray:
    """Indices that receive this trade's pool, in ascending order.

    Poorest-fraction ties at the boundary go to the lower agent index.
    """
    wealth_after_tax = np.asarray(wealth_after_tax, dtype=np.float64)
    n = wealth_after_tax.size
    if n == 0:
        raise InvariantViolation("cannot select beneficiaries from an empty economy")
    k = policy.n_beneficiaries(n)
    if k >= n:
        return np.arange(n)
    scratch = np.empty(n)
    out = np.empty(n, dtype=np.int64)
    m = _kernels.select_poorest(wealth_after_tax, k, scratch, out)
    return np.sort(out[:m])


def redistribute(state: EconomyState, pool: float, beneficiaries) -> None:
    """Add ``pool / |S|`` to every agent in ``beneficiaries``."""
    beneficiaries = np.asarray(beneficiaries, dtype=np.int64)
    if beneficiaries.size == 0:
        raise InvariantViolation("empty beneficiary set")
    if pool < 0:
        raise InvariantViolation(f"negative tax pool {pool!r}")
    if pool == 0.0:
        return
    state.wealth[beneficiaries] += pool / beneficiaries.size


def trade_step(state: EconomyState, params: ModelParams) -> TradeOutcome:
    """One full trade: pair draw, split fraction draw, taxed exchange, redistribution."""
    i, j = sample_pair(state)
    eps = float(next_double(state.rng))
    w = state.wealth
    w[i], w[j], pool = exchange(w[i], w[j], eps, params.tax_rate)
    beneficiaries = select_beneficiaries(w, params.policy)
    redistribute(state, pool, beneficiaries)
    state.time += 1
    return TradeOutcome(i=i, j=j, epsilon=eps, pool=pool, beneficiaries=beneficiaries)


def run_trades(state: EconomyState, params: ModelParams, n_trades: int) -> None:
    """Apply ``n_trades`` trades with the compiled kernel (same stream as :func:`trade_step`)."""
    if n_trades < 0:
        raise ValueError(f"n_trades must be >= 0, got {n_trades}")
    if state.n_agents != params.n_agents:
        raise ConfigurationError(
            f"state has {state.n_agents} agents but params expect {params.n_agents}")
    if n_trades == 0:
        return
    n = state.n_agents
    _kernels.run_trades(state.wealth, state.rng, n_trades, float(params.tax_rate),
                        params.n_beneficiaries, np.empty(n), np.empty(n, dtype=np.int64))
    state.time += n_trades


def run_sweeps(state: EconomyState, params: ModelParams, n_sweeps: int) -> None:
    """Advance by ``n_sweeps`` Monte Carlo sweeps of ``N`` trades each."""
    if n_sweeps < 0:
        raise ValueError(f"n_sweeps must be >= 0, got {n_sweeps}")
    run_trades(state, params, n_sweeps * params.n_agents)


def check_conservation(state: EconomyState, total_wealth: float, rtol: float = 1e-9) -> float:
    """Relative drift of the total; raises :class:`InvariantViolation` past ``rtol``."""
    drift = abs(state.total() - total_wealth) / total_wealth
    if drift > rtol:
        raise InvariantViolation(
            f"total wealth drifted by {drift:.3e} (relative) after {state.time} trades")
    if state.wealth.min() < 0:
        raise InvariantViolation(f"negative wealth after {state.time} trades")
    return drift
