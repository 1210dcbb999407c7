"""Line plots of emitted figure series.

Rendering is a convenience layered on top of the CSV output: every plot
is produced from a FigureSeries that has already been (or will be)
written to disk, never from intermediate state, so the picture can
always be regenerated from the delimited file alone.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .series import FigureSeries

__all__ = ["render_series", "render_overlay"]

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "lines.linewidth": 1.4,
    "legend.fontsize": 9,
    "axes.labelsize": 11,
}


def _markers_from_metadata(ax, metadata: dict) -> None:
    # keys like marker_T1=3.75 become labelled vertical guides
    for key, value in metadata.items():
        if not key.startswith("marker_"):
            continue
        try:
            pos = float(value)
        except (TypeError, ValueError):
            continue
        ax.axvline(pos, color="0.35", linestyle="--", linewidth=0.9)
        ax.annotate(
            key[len("marker_"):], xy=(pos, 0.98), xycoords=("data", "axes fraction"),
            ha="left", va="top", fontsize=8, color="0.25",
        )


def render_series(series: FigureSeries, path, y_label: str = "") -> None:
    """Plot every non-check column of ``series`` against its first column."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        x = series.rows[:, 0]
        for idx, name in enumerate(series.columns[1:], start=1):
            if name.endswith("_check"):
                continue
            ax.plot(x, series.rows[:, idx], label=name)
        ax.set_xlabel(series.axis_label)
        if y_label:
            ax.set_ylabel(y_label)
        ax.set_title(series.name)
        _markers_from_metadata(ax, series.metadata)
        if len(series.columns) > 2:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def render_overlay(series_list, path, y_label: str = "") -> None:
    """Plot matching-shape series on shared axes, one line per series."""
    if not series_list:
        return
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for series in series_list:
            ax.plot(series.rows[:, 0], series.rows[:, 1], label=series.name)
        ax.set_xlabel(series_list[0].axis_label)
        if y_label:
            ax.set_ylabel(y_label)
        _markers_from_metadata(ax, series_list[0].metadata)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
