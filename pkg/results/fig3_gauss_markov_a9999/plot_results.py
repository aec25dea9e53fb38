"""Plot error rates from results.csv next to this script: python plot_results.py"""
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "results.csv", newline="")))
curves = defaultdict(list)
for row in rows:
    curves[row["scheme"]].append(row)

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for ax, rate in zip(axes, ("ber", "wer")):
    for scheme, pts in curves.items():
        pts = sorted(pts, key=lambda r: float(r["ebn0_db"]))
        pts = [r for r in pts if float(r[rate]) > 0]
        if not pts:
            continue
        x = [float(r["ebn0_db"]) for r in pts]
        y = [float(r[rate]) for r in pts]
        e = [float(r[rate + "_ci_half"]) for r in pts]
        ax.errorbar(x, y, yerr=e, marker="o", markersize=3, capsize=2, label=scheme)
    ax.set_yscale("log")
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel(rate.upper())
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
fig.tight_layout()
out = here / (sys.argv[1] if len(sys.argv) > 1 else "results.png")
fig.savefig(out, dpi=150)
print(out)
