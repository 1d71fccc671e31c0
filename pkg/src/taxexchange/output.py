"""CSV and metadata files written by the command line tool.

Floats are written with 17 significant digits so that reading a file back
gives the identical doubles.
"""
from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .experiment import RunResult, SweepResult

PW_COLUMNS = ("w_bin_center", "density")
QW_COLUMNS = ("w", "Q")
SWEEP_COLUMNS = ("f", "w_m", "lognormal_slope", "r_squared", "exponential_T", "samples")
SWEEP_PW_COLUMNS = ("f", "w_bin_center", "density")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def render_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def pw_table(run: RunResult) -> str:
    hist = run.histogram
    return render_csv(PW_COLUMNS, zip(hist.centers, hist.density()))


def qw_table(run: RunResult) -> str:
    return render_csv(QW_COLUMNS, zip(run.ccdf.w, run.ccdf.q))


def sweep_table(sweep: SweepResult) -> str:
    return render_csv(SWEEP_COLUMNS, ((r.f, r.w_m, r.lognormal_slope, r.r_squared,
                                       r.exponential_T, r.samples) for r in sweep.rows))


def sweep_pw_table(sweep: SweepResult) -> str:
    rows = []
    for run in sweep.runs:
        hist = run.histogram
        rows.extend((run.tax_rate, c, d) for c, d in zip(hist.centers, hist.density()))
    return render_csv(SWEEP_PW_COLUMNS, rows)


def read_csv(path) -> dict[str, np.ndarray]:
    """Column name -> float array (integers come back as exact floats)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader if row]
    arr = np.array(data, dtype=np.float64).reshape(len(data), len(header))
    return {name: arr[:, k] for k, name in enumerate(header)}


def write_bundle(out_dir, files: dict[str, str]) -> list[Path]:
    """Write every file or none: each goes to a temp name, then all are renamed."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)
    return [dest for _, dest in staged]


def meta_json(meta: dict) -> str:
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"
