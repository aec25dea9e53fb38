"""Error-rate figures rendered straight to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .config import Scheme  # noqa: E402

LABELS = {
    Scheme.TWO_PHASE_LS: "Two-phase MLSE (LS)",
    Scheme.CONVENTIONAL_LS: "Conventional MLSE (LS)",
    Scheme.EXHAUSTIVE_NEAR_ML: "Exhaustive near-ML (LS)",
    Scheme.EXHAUSTIVE_FULL_ML: "Exhaustive ML (LS)",
    Scheme.CONVENTIONAL_PERFECT_CSI: "Conventional MLSE (perfect CSI)",
    Scheme.CONVENTIONAL_LMS: "Conventional MLSE (LMS)",
}
MARKERS = "osd^vx"

rc = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "figure.figsize": (5.0, 3.8),
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def plot_error_rate(result, rate: str = "ber", ax=None):
    """Semilog error-rate curves of every scheme in a sweep, with 95% CI error bars."""
    if rate not in ("ber", "wer"):
        raise ValueError(f"rate must be 'ber' or 'wer', got {rate!r}")
    if ax is None:
        _, ax = plt.subplots()
    for k, scheme in enumerate(result.config.schemes):
        curve = [p for p in result.curve(scheme) if getattr(p, rate) > 0]
        if not curve:
            continue
        x = [p.ebn0_db for p in curve]
        y = [getattr(p, rate) for p in curve]
        bounds = [p.ber_interval() if rate == "ber" else p.wer_interval() for p in curve]
        err = [[v - lo for v, (lo, _) in zip(y, bounds)], [hi - v for v, (_, hi) in zip(y, bounds)]]
        ax.errorbar(x, y, yerr=err, marker=MARKERS[k % len(MARKERS)], markersize=4,
                    capsize=2, linewidth=1, label=LABELS[scheme])
    ax.set_yscale("log")
    ax.set_xlabel(r"$E_b/N_0$ (dB)")
    ax.set_ylabel("BER" if rate == "ber" else "WER")
    ax.legend(loc="lower left")
    return ax


def save_figures(result, out_dir) -> list:
    """Write ``ber.png`` and ``wer.png`` into ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    paths = []
    with plt.rc_context(rc):
        for rate in ("ber", "wer"):
            fig, ax = plt.subplots()
            plot_error_rate(result, rate, ax)
            ax.set_title(f"N={result.config.N}, T={result.config.T}, P={result.config.P}")
            fig.tight_layout()
            path = out_dir / f"{rate}.png"
            fig.savefig(path, dpi=150)
            plt.close(fig)
            paths.append(path)
    return paths
