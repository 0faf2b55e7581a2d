"""Figure rendering: log-scale error-rate curves in the house style.

Simulation series draw as markers joined by solid lines, bounds as dashed
lines, Shannon limits as vertical dotted lines.  Rendering is deterministic
for a fixed spec and fixture inputs (Agg backend, fixed size and dpi, no
embedded timestamps).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .csvio import read_bound_curve, read_limit, read_sweep
from .spec import PlotSpec

_SIM_MARKERS = ("o", "s", "^", "v", "D", "p", "*")
_FIGSIZE = (6.4, 4.4)
_DPI = 120


def render(spec: PlotSpec) -> Path:
    """Render one figure per the spec; returns the written path."""
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    try:
        sim_count = 0
        for series in spec.series:
            if series.role == "simulation":
                data = read_sweep(series.path)
                y = data.ser if spec.metric == "ser" else data.ber
                ax.semilogy(
                    data.snr_db,
                    y,
                    marker=_SIM_MARKERS[sim_count % len(_SIM_MARKERS)],
                    markersize=5,
                    linewidth=1.2,
                    label=series.label,
                )
                sim_count += 1
            elif series.role == "bound":
                data = read_bound_curve(series.path)
                ax.semilogy(
                    data.snr_db,
                    data.value,
                    linestyle="--",
                    linewidth=1.4,
                    label=series.label,
                )
            else:  # limit
                db = series.value
                if db is None:
                    db = read_limit(series.path).gamma_lim_db
                ax.axvline(db, linestyle=":", linewidth=1.2, color="0.3")
                ax.annotate(
                    series.label,
                    xy=(db, 0.02),
                    xycoords=("data", "axes fraction"),
                    rotation=90,
                    fontsize=8,
                    ha="right",
                    va="bottom",
                )
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("SER" if spec.metric == "ser" else "BER")
        if spec.title:
            ax.set_title(spec.title)
        if spec.xlim != (None, None):
            ax.set_xlim(*spec.xlim)
        if spec.ylim != (None, None):
            ax.set_ylim(*spec.ylim)
        ax.grid(True, which="both", alpha=0.35)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(loc="lower left", fontsize=9)
        out = Path(spec.output)
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, metadata=_strip_metadata(out.suffix))
        return out
    finally:
        plt.close(fig)


def _strip_metadata(suffix: str):
    # keep output byte-stable run to run: drop creator/date style fields
    if suffix == ".png":
        return {"Software": None}
    if suffix == ".svg":
        return {"Date": None, "Creator": None}
    if suffix == ".pdf":
        return {"CreationDate": None, "Creator": None, "Producer": None}
    return None
