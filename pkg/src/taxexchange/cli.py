"""Command line entry point: ``taxexchange {run,sweep,analyze}``.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
Set ``TAXEXCHANGE_LOG`` (DEBUG, INFO, WARNING, ...) for log verbosity.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunSpec, parse_config
from .exceptions import ConfigurationError, InsufficientDataError, TaxExchangeError
from .experiment import Criterion, find_optimal_tax, run_simulation, sweep_tax
from .output import (meta_json, pw_table, qw_table, read_csv, render_csv, sweep_pw_table,
                     sweep_table, write_bundle)
from .stats import EmpiricalCCDF, fit_exponential, fit_lognormal_slope

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("taxexchange")


def _load(args) -> RunSpec:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {args.config!r}: {exc}") from None
    overrides = {"seed": args.seed}
    if args.out is not None:
        overrides["output_dir"] = args.out
    return parse_config(text, overrides)


def _meta(spec: RunSpec, command: str, started: float, drift: float, extra=None) -> dict:
    cfg = spec.config
    p = cfg.params
    meta = {
        "command": command,
        "engine_version": __version__,
        "n_agents": p.n_agents,
        "total_wealth": p.total_wealth,
        "policy": spec.values.get("policy", "uniform_all"),
        "poorest_fraction": getattr(p.policy, "fraction", None),
        "n_beneficiaries": p.n_beneficiaries,
        "seed": cfg.master_seed,
        "burn_in_sweeps": cfg.burn_in_sweeps,
        "sample_sweeps": cfg.sample_sweeps,
        "sample_interval": cfg.sample_interval_sweeps,
        "realizations": cfg.n_realizations,
        "bin_width": cfg.bin_width,
        "n_bins": cfg.n_bins,
        "output_dir": spec.output_dir,
        "conservation_drift": drift,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    meta.update(extra or {})
    return meta


def cmd_run(args) -> int:
    spec = _load(args)
    if not spec.tax_rate_given:
        raise ConfigurationError("run needs a single tax_rate in the config")
    started = time.perf_counter()
    result = run_simulation(spec.config, n_jobs=args.jobs)
    extra = {
        "tax_rate": result.tax_rate,
        "samples": result.samples,
        "w_m": result.modal_wealth,
        "lognormal_slope": result.lognormal_fit.slope if result.lognormal_fit else None,
        "exponential_T": (result.exponential_fit.temperature
                          if result.exponential_fit else None),
        "block_distance": result.block_distance,
        "overflow_fraction": result.histogram.overflow_fraction(),
    }
    meta = _meta(spec, "run", started, result.conservation_drift, extra)
    write_bundle(spec.output_dir, {
        "pw.csv": pw_table(result),
        "qw.csv": qw_table(result),
        "run_meta.json": meta_json(meta),
    })
    print(f"f={result.tax_rate:g}  w_m={result.modal_wealth:.6g}  "
          f"lognormal_slope={extra['lognormal_slope']}  T={extra['exponential_T']}  "
          f"drift={result.conservation_drift:.3g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _load(args)
    started = time.perf_counter()
    sweep = sweep_tax(spec.config, spec.tax_grid, n_jobs=args.jobs)
    optima = {}
    for criterion in Criterion:
        try:
            optima[criterion.value] = find_optimal_tax(sweep, criterion)
        except InsufficientDataError:
            optima[criterion.value] = None
    drift = max(run.conservation_drift for run in sweep.runs)
    meta = _meta(spec, "sweep", started, drift, {
        "tax_grid": list(spec.tax_grid),
        "optimal_tax_max_mode": optima["max_mode"],
        "optimal_tax_min_slope": optima["min_slope"],
    })
    write_bundle(spec.output_dir, {
        "sweep.csv": sweep_table(sweep),
        "sweep_pw.csv": sweep_pw_table(sweep),
        "run_meta.json": meta_json(meta),
    })
    for criterion in Criterion:
        value = optima[criterion.value]
        print(f"f*({criterion.value}) = {'undefined' if value is None else format(value, 'g')}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    directory = Path(args.dir if args.dir is not None else (args.out or "."))
    pw_path = Path(args.pw) if args.pw else directory / "pw.csv"
    qw_path = Path(args.qw) if args.qw else directory / "qw.csv"
    try:
        pw = read_csv(pw_path)
        qw = read_csv(qw_path)
    except (OSError, ValueError, StopIteration, KeyError) as exc:
        raise ConfigurationError(f"cannot read {pw_path} / {qw_path}: {exc}") from None
    n_obs = None
    meta_path = directory / "run_meta.json"
    if meta_path.exists():
        n_obs = json.loads(meta_path.read_text()).get("samples")
    centers, density = pw["w_bin_center"], pw["density"]
    if centers.size == 0:
        raise InsufficientDataError("pw.csv holds no bins")
    w_m = float(centers[int(np.argmax(density))])
    ccdf = EmpiricalCCDF(qw["w"], qw["Q"], n_obs)
    rows = []
    nan = float("nan")
    try:
        ln = fit_lognormal_slope(ccdf, w_m)
    except InsufficientDataError:
        ln = None
    try:
        ex = fit_exponential(ccdf)
    except InsufficientDataError:
        ex = None
    rows.append((w_m, ln.slope if ln else nan, ln.r_squared if ln else nan,
                 ex.temperature if ex else nan, ex.r_squared if ex else nan))
    table = render_csv(("w_m", "lognormal_slope", "r_squared", "exponential_T",
                        "exponential_r_squared"), rows)
    write_bundle(directory, {"analysis.csv": table})
    sys.stdout.write(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taxexchange",
                                     description="Taxed inelastic wealth-exchange simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_config=True):
        if need_config:
            p.add_argument("--config", required=True, help="key=value configuration file")
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
            p.add_argument("--jobs", type=int, default=1,
                           help="worker threads for realizations (results do not depend on it)")
        p.add_argument("--out", default=None, help="output directory (overrides output_dir)")

    common(sub.add_parser("run", help="simulate one tax rate, write pw.csv and qw.csv"))
    common(sub.add_parser("sweep", help="simulate a tax grid, write sweep.csv"))
    an = sub.add_parser("analyze", help="recompute mode and fits from pw.csv/qw.csv")
    common(an, need_config=False)
    an.add_argument("--dir", default=None, help="directory holding pw.csv and qw.csv")
    an.add_argument("--pw", default=None)
    an.add_argument("--qw", default=None)
    return parser


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "analyze": cmd_analyze}


def main(argv=None) -> int:
    level = os.environ.get("TAXEXCHANGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TaxExchangeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
