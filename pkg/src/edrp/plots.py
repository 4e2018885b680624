"""Rendering of benchmark figures from summary rows.

Kept separate from the harness so headless environments only pay the
matplotlib import when figures are requested.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_METHOD_STYLE = {
    "csa": {"color": "tab:blue", "marker": "o", "label": "CSA"},
    "edf": {"color": "tab:orange", "marker": "s", "label": "EDF"},
    "ndf": {"color": "tab:green", "marker": "^", "label": "NDF"},
    "oracle": {"color": "tab:red", "marker": "*", "label": "Optimal"},
}

_FIGURES = (
    ("served", "served_mean", "served_std", "Successful deliveries"),
    ("cost", "avg_cost_mean", "avg_cost_std", "Average cost per delivery [$]"),
    ("elapsed", "elapsed_ms_mean", "elapsed_ms_std", "Planning time [ms]"),
)


def render_sweep_figures(
    summary: Sequence, sweep_label: str, outdir: str | Path, dpi: int = 150
) -> list[Path]:
    """Render one PNG per metric (served / cost / elapsed) from summary rows.

    ``summary`` holds objects with ``method``, ``sweep_value`` and the
    aggregate attributes named in the figure table (duck-typed so the harness
    stays importable without matplotlib).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    methods = [m for m in _METHOD_STYLE if any(s.method == m for s in summary)]
    written: list[Path] = []
    for metric, mean_attr, std_attr, ylabel in _FIGURES:
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for method in methods:
            points = sorted(
                (s for s in summary if s.method == method), key=lambda s: s.sweep_value
            )
            if not points:
                continue
            xs = [s.sweep_value for s in points]
            means = [getattr(s, mean_attr) for s in points]
            stds = [getattr(s, std_attr) for s in points]
            style = _METHOD_STYLE[method]
            ax.errorbar(
                xs,
                means,
                yerr=stds,
                capsize=3,
                linewidth=1.4,
                markersize=5,
                **style,
            )
        ax.set_xlabel(sweep_label)
        ax.set_ylabel(ylabel)
        ax.grid(True, linestyle=":", alpha=0.6)
        ax.legend(frameon=False)
        fig.tight_layout()
        path = outdir / f"figure_{metric}.png"
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        written.append(path)
    return written
