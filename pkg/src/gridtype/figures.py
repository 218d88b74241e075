"""Render report figures (mean session times) to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import SimulationReport

_MODEL_COLORS = {"joint": "#4c72b0", "marginal": "#55a868", "baseline": "#c44e52"}


def _grouped_bars(ax, report: SimulationReport, criterion: str) -> None:
    accs = list(report.profile_targets)
    width = 0.8 / max(len(report.models), 1)
    x = np.arange(len(accs))
    for i, model in enumerate(report.models):
        means, stds = [], []
        for acc in accs:
            times = report.cell_times(acc, model, criterion)
            means.append(times.mean() if len(times) else np.nan)
            stds.append(times.std(ddof=1) if len(times) > 1 else 0.0)
        ax.bar(x + i * width, means, width, yerr=stds, capsize=2,
               label=model, color=_MODEL_COLORS.get(model))
    ax.set_xticks(x + width * (len(report.models) - 1) / 2)
    ax.set_xticklabels([f"{a:.2f}" for a in accs])
    ax.set_xlabel("calibration accuracy")
    ax.set_ylabel("mean session time (s)")
    ax.set_title(f"criterion: {criterion}")
    ax.legend()


def render_report_figures(report: SimulationReport, outdir, stem: str = "session_time") -> list[Path]:
    """One grouped bar chart per criterion; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for criterion in report.criteria:
        fig, ax = plt.subplots(figsize=(7, 4))
        _grouped_bars(ax, report, criterion)
        fig.tight_layout()
        path = outdir / f"{stem}_{criterion.replace('-', '_')}.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written


def render_context_figure(reports: dict[str, SimulationReport], outdir,
                          stem: str = "context_effect") -> Path:
    """Two stacked panels (favor / oppose) for the context experiment."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, axes = plt.subplots(len(reports), 1, figsize=(7, 4 * len(reports)),
                             squeeze=False)
    for ax, (mode, report) in zip(axes[:, 0], reports.items()):
        criterion = report.criteria[0]
        _grouped_bars(ax, report, criterion)
        ax.set_title(f"context {mode} (criterion: {criterion})")
    fig.tight_layout()
    path = outdir / f"{stem}.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
