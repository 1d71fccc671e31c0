"""Plot the CSV files written by ``taxexchange run`` and ``taxexchange sweep``.

Documentation aid, not part of the package; needs matplotlib.

    python scripts/plot_outputs.py out/            # pw.csv / qw.csv and/or sweep.csv
"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt

from taxexchange.output import read_csv


def main(directory):
    d = Path(directory)
    if (d / "pw.csv").exists():
        pw, qw = read_csv(d / "pw.csv"), read_csv(d / "qw.csv")
        fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
        a.plot(pw["w_bin_center"], pw["density"])
        a.set(xlabel="w", ylabel="P(w)")
        b.semilogy(qw["w"], qw["Q"])
        b.set(xlabel="w", ylabel="Q(w)")
        fig.tight_layout()
        fig.savefig(d / "distribution.png", dpi=120)
    if (d / "sweep.csv").exists():
        sw = read_csv(d / "sweep.csv")
        fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
        a.plot(sw["f"], sw["w_m"], "o-")
        a.set(xlabel="f", ylabel="w_m")
        b.plot(sw["f"], sw["lognormal_slope"], "o-")
        b.set(xlabel="f", ylabel="log-normal slope")
        fig.tight_layout()
        fig.savefig(d / "sweep.png", dpi=120)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "out")
