"""Monte Carlo simulator of a taxed inelastic wealth-exchange economy.

Two random agents pool their wealth, pay a fraction ``f`` of it as tax and
split the rest by a uniform random fraction; the tax is shared equally by all
agents or by the poorest fraction of them.
"""
__version__ = "0.1.0"

from .exceptions import (ConfigurationError, InsufficientDataError, InvariantViolation,
                         SweepPointError, TaxExchangeError)
from .exchange_core import (EconomyState, ModelParams, PoorestFraction, TradeOutcome,
                            UniformAll, exchange, init_state, redistribute, run_sweeps,
                            run_trades, sample_pair, select_beneficiaries, trade_step)
from .experiment import (Criterion, RunResult, SimulationConfig, SweepResult, SweepRow,
                         TaxedExchangeModel, equilibration_check, find_optimal_tax,
                         run_simulation, sweep_tax)
from .stats import WealthDistribution, WealthHistogram
