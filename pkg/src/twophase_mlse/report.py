"""Write sweep results as CSV plus a config echo, a plot script and figures."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import yaml

COLUMNS = ("scheme", "ebn0_db", "blocks", "bit_errors", "word_errors", "ber", "wer",
           "ber_ci_half", "wer_ci_half", "mult_count_total", "lambda_fallbacks", "seed")

PLOT_SCRIPT = '''\
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
'''


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def results_csv(result) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for ebn0_db in result.config.ebn0_grid_db:
        for scheme in result.config.schemes:
            try:
                p = result.point(scheme, ebn0_db)
            except KeyError:
                continue
            writer.writerow([_fmt(v) for v in (
                p.scheme.value, float(p.ebn0_db), p.blocks, p.bit_errors, p.word_errors,
                float(p.ber), float(p.wer), float(p.ber_ci_half), float(p.wer_ci_half),
                p.mults, p.lambda_fallbacks, result.config.base_seed)])
    return buf.getvalue()


def emit_outputs(result, out_dir, render: bool = True) -> list:
    """Write ``results.csv``, ``config.yaml``, ``plot_results.py`` and optionally figures.

    Returns:
        Paths written, in that order.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in (("results.csv", results_csv(result)),
                           ("config.yaml", yaml.safe_dump(result.config.to_dict(), sort_keys=False)),
                           ("plot_results.py", PLOT_SCRIPT)):
            path = out_dir / name
            path.write_text(text)
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write results to {out_dir}: {exc}") from exc
    if render and result.points:
        from .plotting import save_figures
        written.extend(save_figures(result, out_dir))
    return written
