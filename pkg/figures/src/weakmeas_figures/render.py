"""Deterministic figure rendering for the four CSV kinds.

Output is pinned: Agg backend, fixed size, DejaVu fonts, viridis colormap,
constant PNG metadata.  Rendering the same CSV twice produces
byte-identical images.  NaN cells (the producer's ``inf`` tokens) appear
as line gaps or blanked heatmap cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .schema import SchemaError, Table, load_table  # noqa: E402

_RC = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "image.cmap": "viridis",
}
_PNG_METADATA = {"Software": "weakmeas-figures"}

KINDS = ("timeseries", "overlay", "heatmap", "goalmap")


@dataclass(frozen=True)
class FigureSpec:
    """What to render: inputs, figure kind, labels, destination."""

    inputs: tuple[str, ...]
    kind: str
    out_path: str
    time_label: str = "t"
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def _timeseries(table: Table, axes) -> None:
    t = table["t"]
    ax = axes[0]
    ax.plot(t, table["one_minus_C_fid"], color="tab:blue", label="1 - C (fid)")
    ax.plot(t, table["one_minus_B_fid"], color="tab:red", label="1 - B (fid)")
    ax.set_ylabel("fidelity measures")
    ax.legend(loc="lower right")
    ax = axes[1]
    ax.plot(t, table["P_L_real"], color="tab:red", label="system")
    ax.plot(t, table["P_L_est"], color="tab:blue", label="estimator")
    ax.plot(t, table["P_L_ideal"], color="0.6", lw=0.8, label="ideal")
    ax.set_ylabel("left population")
    ax.legend(loc="upper right")
    ax = axes[2]
    ax.plot(t, table["C_re"], color="tab:blue", label="confidence")
    ax.plot(t, table["B_re"], color="tab:red", label="backaction")
    ax.set_ylabel("relative entropy (nats)")
    ax.legend(loc="upper right")


def _overlay(table: Table, ax) -> None:
    t = table["t"]
    ax.plot(t, table["P_L_est"], "--", color="tab:blue",
            label="estimator (trajectory average)")
    ax.plot(t, table["P_L_me2"], color="tab:orange",
            label="estimator (ensemble equation)")
    ax.plot(t, table["P_L_real"], color="0.6", lw=0.8, label="system")
    ax.set_ylabel("left population")
    ax.legend(loc="upper right")


def _pivot(table: Table, name: str):
    t = table["t"]
    k = table["kappa"]
    t_vals = np.unique(t)
    k_vals = np.unique(k)
    grid = np.full((len(k_vals), len(t_vals)), np.nan)
    ti = np.searchsorted(t_vals, t)
    ki = np.searchsorted(k_vals, k)
    grid[ki, ti] = table[name]
    return t_vals, k_vals, grid


def _heatmap_panel(ax, table: Table, name: str, title: str,
                   with_crossing: bool) -> None:
    t_vals, k_vals, grid = _pivot(table, name)
    masked = np.ma.masked_invalid(grid)
    mesh = ax.pcolormesh(t_vals, k_vals, masked, shading="nearest")
    plt.colorbar(mesh, ax=ax)
    if with_crossing:
        cross = table["cross"] > 0.5
        ax.plot(table["t"][cross], table["kappa"][cross], "s", ms=4,
                markerfacecolor="white", markeredgecolor="black", lw=0,
                label="C = B")
        if cross.any():
            ax.legend(loc="upper right")
    ax.set_title(title)
    ax.set_ylabel("measurement strength")


def render(spec: FigureSpec) -> str:
    """Render the spec to its output path; returns the path."""
    with plt.rc_context(_RC):
        if spec.kind == "timeseries":
            table = load_table(spec.inputs[0], spec.kind)
            fig, axes = plt.subplots(3, 1, figsize=(6.4, 7.2), sharex=True)
            _timeseries(table, axes)
            axes[-1].set_xlabel(spec.time_label)
        elif spec.kind == "overlay":
            table = load_table(spec.inputs[0], spec.kind)
            fig, ax = plt.subplots(figsize=(6.4, 3.6))
            _overlay(table, ax)
            ax.set_xlabel(spec.time_label)
        elif spec.kind == "heatmap":
            table = load_table(spec.inputs[0], spec.kind)
            fig, axes = plt.subplots(3, 1, figsize=(6.4, 9.0), sharex=True)
            for ax, (name, title, crossing) in zip(axes, (
                    ("C_re", "confidence", False),
                    ("B_re", "backaction", False),
                    ("E_re", "epitome", True))):
                _heatmap_panel(ax, table, name, title, crossing)
            axes[-1].set_xlabel(spec.time_label + " (Rabi periods)")
        else:  # goalmap
            table = load_table(spec.inputs[0], spec.kind)
            fig, ax = plt.subplots(figsize=(6.4, 4.2))
            _heatmap_panel(ax, table, "O", "goal-program objective", False)
            ax.set_xlabel(spec.time_label + " (Rabi periods)")
        fig.tight_layout()
        fig.savefig(spec.out_path, format="png", metadata=dict(_PNG_METADATA))
        plt.close(fig)
    return spec.out_path
