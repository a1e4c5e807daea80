"""SVG line and bar charts of comparison reports and sweeps"""

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
# Deterministic SVG element ids
matplotlib.rcParams["svg.hashsalt"] = "ensemble-powerflow"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..sampling import LabelFamily  # noqa: E402
from .comparison import Method, RmseReport  # noqa: E402
from .sweeps import SweepCurve, SweepParameter  # noqa: E402


def plot_sweep(curve: SweepCurve, path: Union[str, Path]) -> Path:
    """One panel per label family; test and train RMSE against the grid

    Boosting sweeps use a log-scaled RMSE axis. Bagging sweeps add each
    member's own test RMSE as a scatter.
    """
    path = Path(path)
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    for ax, family in zip(axes.flat, LabelFamily):
        for split, style in (("test", "-o"), ("train", "--s")):
            values = curve.values(family, split)
            ax.plot(curve.grid, values, style, markersize=3, label=split)
        scatter = curve.member_scatter.get((family.value, "test"))
        if scatter:
            ax.scatter(
                np.arange(1, len(scatter) + 1),
                scatter,
                s=6,
                alpha=0.4,
                color="grey",
                label="member (test)",
            )
        if curve.parameter is SweepParameter.T:
            ax.set_yscale("log")
        ax.set_title(family.value)
        ax.set_ylabel("RMSE (p.u.)")
        ax.grid(True, alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel(curve.parameter.value)
    axes[0, 0].legend()
    fig.suptitle(f"{curve.case}: RMSE against {curve.parameter.value}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_comparison(report: RmseReport, path: Union[str, Path]) -> Path:
    """Grouped bars of test RMSE (x 1e-5 p.u.) per family and method"""
    path = Path(path)
    frame = report.to_frame()
    frame = frame[frame["split"] == "test"]
    families = [f.value for f in LabelFamily]
    methods = [m.value for m in Method]
    width = 0.8 / len(methods)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    positions = np.arange(len(families))
    for k, method in enumerate(methods):
        rows = frame[frame["method"] == method].set_index("family")
        heights = [
            float(rows.loc[f, "rmse_x1e5"]) if f in rows.index else np.nan
            for f in families
        ]
        ax.bar(positions + k * width, heights, width, label=method)
    ax.set_xticks(positions + width * (len(methods) - 1) / 2)
    ax.set_xticklabels(families)
    ax.set_yscale("log")
    ax.set_ylabel("test RMSE (x 1e-5 p.u.)")
    ax.set_title(", ".join(sorted(frame["case"].unique())))
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
