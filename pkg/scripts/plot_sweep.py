"""Plot a sweep CSV: ``embgame sweep --d-max 256 --geometric --out sweep.csv``.

Usage: python scripts/plot_sweep.py sweep.csv [out.png].  Needs matplotlib.
"""
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main(path, out="sweep.png"):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    d = [int(r["d"]) for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.loglog(d, [float(r["eps"]) for r in rows], "o-", label="1 - total")
    ax1.loglog(d, [1 - float(r["overlap"]) for r in rows], "s--", label="1 - overlap")
    ax1.set_xlabel("d")
    ax1.legend()
    ax2.semilogx(d, [float(r["d_times_eps"]) for r in rows], "o-")
    ax2.set_xlabel("d")
    ax2.set_ylabel("d * eps")
    fig.tight_layout()
    fig.savefig(out, dpi=120)


if __name__ == "__main__":
    main(*sys.argv[1:])
