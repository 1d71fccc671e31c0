import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from taxexchange import ConfigurationError, PoorestFraction, UniformAll
from taxexchange.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from taxexchange.config import parse_config, parse_grid
from taxexchange.output import fmt, read_csv, render_csv

SMALL = """\
n_agents = 100
seed = 4
burn_in_sweeps = 30
sample_sweeps = 40
realizations = 2
"""


def write_config(tmp_path, text, name="c.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---- configuration -------------------------------------------------------------

def test_parse_basic():
    spec = parse_config("n_agents=1000\nseed=1\ntax_rate=0.3\npolicy=uniform_all\n")
    assert spec.config.params.tax_rate == 0.3
    assert spec.config.params.policy == UniformAll()
    assert spec.config.params.total_wealth == 1000.0
    assert spec.tax_rate_given and spec.output_dir == "out"
    assert len(spec.tax_grid) == 20 and spec.tax_grid[-1] == 0.95


def test_parse_poorest():
    spec = parse_config("n_agents=1000\nseed=1\npolicy=poorest\npoorest_fraction=0.2\n")
    assert spec.config.params.policy == PoorestFraction(0.2)
    assert spec.config.params.n_beneficiaries == 200


def test_comments_and_overrides():
    spec = parse_config("# economy\nn_agents = 50  # small\nseed = 1\n", {"seed": 9, "output_dir": None})
    assert spec.config.master_seed == 9


@pytest.mark.parametrize("text, key", [
    ("n_agents=10\nseed=1\ntax_rate=1.5", "tax_rate"),
    ("n_agents=10\nseed=1\ncolour=blue", "colour"),
    ("seed=1", "n_agents"),
    ("n_agents=10", "seed"),
    ("n_agents=10\nseed=1\nseed=2", "seed"),
    ("n_agents=ten\nseed=1", "n_agents"),
    ("n_agents=10\nseed=-3", "seed"),
    ("n_agents=10\nseed=1\npolicy=richest", "policy"),
    ("n_agents=10\nseed=1\npoorest_fraction=0", "poorest_fraction"),
    ("n_agents=10\nseed=1\ntax_grid=0,2", "tax_grid"),
    ("n_agents=10\nseed=1\nrealizations=0", "realizations"),
    ("n_agents=10\nseed=1\nbin_width=nan", "bin_width"),
    ("n_agents=10\nseed=1\njust words", "line 3"),
])
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigurationError, match=key):
        parse_config(text)


def test_grid_syntax():
    assert parse_grid("0:0.95:0.05") == tuple(round(0.05 * k, 12) for k in range(20))
    assert parse_grid("0.1, 0.3") == (0.1, 0.3)
    assert parse_grid("0.4:0.4:0.1") == (0.4,)
    with pytest.raises(ValueError):
        parse_grid("0:1")


# ---- CSV ---------------------------------------------------------------------

@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False),
                          st.floats(allow_nan=False, allow_infinity=False)), max_size=20))
def test_csv_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    path.write_text(render_csv(("a", "b"), rows))
    back = read_csv(path)
    for k, (a, b) in enumerate(rows):
        assert back["a"][k] == a and back["b"][k] == b


def test_fmt():
    assert fmt(3) == "3"
    assert fmt(np.int64(7)) == "7"
    assert fmt(float("nan")) == "nan"
    assert float(fmt(0.1)) == 0.1
    assert fmt(0.1) == "0.10000000000000001"


# ---- commands ------------------------------------------------------------------

def test_run_writes_bundle(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL + "tax_rate = 0.3\n")
    out = tmp_path / "run"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_OK
    pw, qw = read_csv(out / "pw.csv"), read_csv(out / "qw.csv")
    assert pw["w_bin_center"].size == 200 and qw["w"].size == 201
    assert (out / "pw.csv").read_text().splitlines()[0] == "w_bin_center,density"
    assert (out / "qw.csv").read_text().splitlines()[0] == "w,Q"
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["samples"] == 2 * 20 * 100
    assert meta["conservation_drift"] <= 1e-9
    assert meta["tax_rate"] == 0.3 and meta["seed"] == 4
    assert "w_m=" in capsys.readouterr().out


def test_run_is_reproducible_and_seed_flag_applies(tmp_path):
    cfg = write_config(tmp_path, SMALL + "tax_rate = 0.1\n")
    for name, seed in (("a", None), ("b", None), ("c", "5")):
        argv = ["run", "--config", cfg, "--out", str(tmp_path / name)]
        if seed:
            argv += ["--seed", seed]
        assert main(argv) == EXIT_OK
    files = ("pw.csv", "qw.csv")
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert (tmp_path / "a/pw.csv").read_bytes() != (tmp_path / "c/pw.csv").read_bytes()


def test_zero_tax_run_has_exponential_tail(tmp_path):
    text = "n_agents=1000\nseed=2\ntax_rate=0\nburn_in_sweeps=200\nsample_sweeps=400\nrealizations=2\n"
    cfg = write_config(tmp_path, text)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    qw = read_csv(tmp_path / "qw.csv")
    sel = (qw["Q"] > 1e-3) & (qw["Q"] < 1)
    slope, _ = np.polyfit(qw["w"][sel], -np.log(qw["Q"][sel]), 1)
    assert slope == pytest.approx(1.0, rel=0.05)


def test_invalid_config_leaves_no_files(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL + "tax_rate = 1.5\n")
    out = tmp_path / "never"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    assert "tax_rate" in capsys.readouterr().err


def test_run_needs_tax_rate(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "x")]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == EXIT_CONFIG


def test_runtime_failure_exit_code(tmp_path, monkeypatch, capsys):
    import taxexchange.cli as cli
    from taxexchange import InvariantViolation

    def explode(*a, **k):
        raise InvariantViolation("negative wealth")

    monkeypatch.setattr(cli, "run_simulation", explode)
    cfg = write_config(tmp_path, SMALL + "tax_rate = 0.3\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_RUNTIME
    assert "negative wealth" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_sweep_one_point(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL + "tax_grid = 0.2\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "f,w_m,lognormal_slope,r_squared,exponential_T,samples"
    assert len(lines) == 2 and lines[1].startswith("0.20000000000000001,")
    printed = capsys.readouterr().out
    assert "f*(max_mode) = 0.2" in printed and "f*(min_slope)" in printed


def test_sweep_deterministic_across_jobs(tmp_path):
    cfg = write_config(tmp_path, SMALL + "tax_grid = 0,0.3,0.6\npolicy = poorest\n")
    for name, jobs in (("a", "1"), ("b", "3")):
        assert main(["sweep", "--config", cfg, "--jobs", jobs, "--out", str(tmp_path / name)]) == 0
    for f in ("sweep.csv", "sweep_pw.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_sweep_failure_names_point(tmp_path, monkeypatch, capsys):
    import taxexchange.experiment as ex
    real = ex.run_sweeps

    def broken(state, params, n):
        if params.tax_rate == 0.6:
            raise RuntimeError("kaput")
        return real(state, params, n)

    monkeypatch.setattr(ex, "run_sweeps", broken)
    cfg = write_config(tmp_path, SMALL + "tax_grid = 0.3,0.6\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == EXIT_RUNTIME
    assert "f=0.6" in capsys.readouterr().err


def test_analyze_reproduces_run(tmp_path):
    text = "n_agents=500\nseed=8\ntax_rate=0.3\nburn_in_sweeps=100\nsample_sweeps=200\nrealizations=2\n"
    cfg = write_config(tmp_path, text)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    meta = json.loads((tmp_path / "run_meta.json").read_text())
    assert main(["analyze", "--dir", str(tmp_path)]) == EXIT_OK
    row = read_csv(tmp_path / "analysis.csv")
    assert row["w_m"][0] == meta["w_m"]
    assert math.isclose(row["lognormal_slope"][0], meta["lognormal_slope"], rel_tol=1e-12)
    assert math.isclose(row["exponential_T"][0], meta["exponential_T"], rel_tol=1e-12)


def test_analyze_missing_files(tmp_path):
    assert main(["analyze", "--dir", str(tmp_path)]) == EXIT_CONFIG


def test_log_level_env_and_module_entry(tmp_path):
    text = "n_agents=100\nseed=1\ntax_rate=0.2\nburn_in_sweeps=0\nsample_sweeps=4\nsample_interval=1\n"
    cfg = write_config(tmp_path, text)
    proc = subprocess.run([sys.executable, "-m", "taxexchange", "run", "--config", cfg,
                           "--out", str(tmp_path / "o")],
                          env={**os.environ, "TAXEXCHANGE_LOG": "ERROR"}, capture_output=True, text=True)
    assert proc.returncode == 0
    assert "WARNING" not in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "taxexchange", "run", "--config", cfg,
                           "--out", str(tmp_path / "p")],
                          env={**os.environ, "TAXEXCHANGE_LOG": "WARNING"}, capture_output=True, text=True)
    assert proc.returncode == 0
    assert "stationary" in proc.stderr
