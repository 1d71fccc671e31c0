"""Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored.  Every key except ``n_agents`` and
``seed`` has a default:

==================  =====================  =========================================
key                 default                meaning
==================  =====================  =========================================
n_agents            (required)             number of agents N
seed                (required)             master seed, unsigned 64-bit
total_wealth        n_agents               total wealth W (default gives W/N = 1)
tax_rate            (none)                 single tax rate, needed by ``run``
tax_grid            0:0.95:0.05            sweep grid, ``a,b,c`` or ``start:stop:step``
policy              uniform_all            ``uniform_all`` or ``poorest``
poorest_fraction    0.2                    beneficiary fraction for ``poorest``
burn_in_sweeps      2000                   discarded sweeps per realization
sample_sweeps       1000                   length of the sampling window in sweeps
sample_interval     2                      sweeps between snapshots
realizations        10                     independent economies per tax rate
bin_width           0.05                   histogram bin, in units of W/N
n_bins              200                    regular bins (plus one overflow bin)
output_dir          out                    destination directory
==================  =====================  =========================================
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ConfigurationError
from .exchange_core import ModelParams
from .experiment import SimulationConfig, make_policy

DEFAULT_GRID = "0:0.95:0.05"

KEYS = {
    "n_agents", "seed", "total_wealth", "tax_rate", "tax_grid", "policy", "poorest_fraction",
    "burn_in_sweeps", "sample_sweeps", "sample_interval", "realizations", "bin_width",
    "n_bins", "output_dir",
}


@dataclass(frozen=True)
class RunSpec:
    """A parsed configuration file."""

    config: SimulationConfig
    tax_grid: tuple[float, ...]
    output_dir: str
    tax_rate_given: bool
    values: dict


def parse_grid(text: str) -> tuple[float, ...]:
    """``"0,0.1,0.3"`` or inclusive ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range grid must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise ValueError("empty grid range")
        return tuple(round(start + k * step, 12) for k in range(n))
    return tuple(float(p) for p in text.split(",") if p.strip())


def _read_pairs(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigurationError(f"unknown key {key!r} (line {lineno})")
        if key in values:
            raise ConfigurationError(f"duplicate key {key!r} (line {lineno})")
        values[key] = value
    return values


def _convert(key, value, kind):
    try:
        if kind is int:
            if not value.lstrip("+").isdigit():
                raise ValueError
            return int(value)
        out = kind(value)
    except ValueError:
        raise ConfigurationError(f"{key}={value!r} is not a valid {kind.__name__}") from None
    if kind is float and not math.isfinite(out):
        raise ConfigurationError(f"{key}={value!r} must be finite")
    return out


def parse_config(text: str, overrides: dict | None = None) -> RunSpec:
    """Validate a configuration document; ``overrides`` replace file values.

    Raises :class:`ConfigurationError` naming the offending key and value.
    """
    values = _read_pairs(text)
    for key, value in (overrides or {}).items():
        if value is not None:
            if key not in KEYS:
                raise ConfigurationError(f"unknown key {key!r}")
            values[key] = str(value)

    for key in ("n_agents", "seed"):
        if key not in values:
            raise ConfigurationError(f"missing required key {key!r}")

    n_agents = _convert("n_agents", values["n_agents"], int)
    seed = _convert("seed", values["seed"], int)
    ints = {k: _convert(k, values[k], int) for k in
            ("burn_in_sweeps", "sample_sweeps", "sample_interval", "realizations", "n_bins")
            if k in values}
    floats = {k: _convert(k, values[k], float) for k in
              ("total_wealth", "tax_rate", "poorest_fraction", "bin_width") if k in values}

    ranges = {
        "n_agents": n_agents >= 2,
        "seed": 0 <= seed < 2**64,
        "total_wealth": floats.get("total_wealth", 1.0) > 0,
        "tax_rate": 0.0 <= floats.get("tax_rate", 0.0) <= 1.0,
        "poorest_fraction": 0.0 < floats.get("poorest_fraction", 0.2) <= 1.0,
        "bin_width": floats.get("bin_width", 1.0) > 0,
        "burn_in_sweeps": ints.get("burn_in_sweeps", 0) >= 0,
        "sample_sweeps": ints.get("sample_sweeps", 1) >= 1,
        "sample_interval": ints.get("sample_interval", 1) >= 1,
        "realizations": ints.get("realizations", 1) >= 1,
        "n_bins": ints.get("n_bins", 2) >= 2,
    }
    for key, ok in ranges.items():
        if not ok:
            raise ConfigurationError(f"{key}={values[key]!r} is out of range")

    policy_name = values.get("policy", "uniform_all")
    if policy_name not in ("uniform_all", "poorest"):
        raise ConfigurationError(f"policy={policy_name!r} must be uniform_all or poorest")
    policy = make_policy(policy_name, floats.get("poorest_fraction", 0.2))

    grid_text = values.get("tax_grid", DEFAULT_GRID)
    try:
        grid = parse_grid(grid_text)
    except ValueError as exc:
        raise ConfigurationError(f"tax_grid={grid_text!r}: {exc}") from None
    if not grid:
        raise ConfigurationError(f"tax_grid={grid_text!r} is empty")
    for f in grid:
        if not 0.0 <= f <= 1.0:
            raise ConfigurationError(f"tax_grid={grid_text!r} has a value outside [0, 1]")

    params = ModelParams(n_agents, floats.get("total_wealth", float(n_agents)),
                         floats.get("tax_rate", 0.0), policy)
    config = SimulationConfig(
        params=params,
        master_seed=seed,
        burn_in_sweeps=ints.get("burn_in_sweeps", 2000),
        sample_sweeps=ints.get("sample_sweeps", 1000),
        sample_interval_sweeps=ints.get("sample_interval", 2),
        n_realizations=ints.get("realizations", 10),
        bin_width=floats.get("bin_width", 0.05),
        n_bins=ints.get("n_bins", 200),
    )
    return RunSpec(config, grid, values.get("output_dir", "out"), "tax_rate" in values, values)
