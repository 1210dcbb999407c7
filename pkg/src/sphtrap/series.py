"""Delimited figure-data files: emit and parse.

Format: '#'-prefixed key=value metadata lines, one column-name row,
then numeric rows with 17 significant digits (float64 round-trips
exactly).  No timestamps or hostnames — reruns with equal inputs must
produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["FigureSeries", "write_series", "read_series"]


@dataclass(frozen=True)
class FigureSeries:
    """One figure's worth of columns plus the header that reproduces it."""

    name: str
    axis_label: str
    columns: tuple
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "columns", tuple(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise DomainError(
                f"rows shape {rows.shape} does not match {len(self.columns)} columns"
            )
        if rows.shape[0] == 0:
            raise DomainError("series must contain at least one row")
        if not np.all(np.isfinite(rows)):
            raise DomainError(f"series {self.name!r} contains non-finite values")
        for key, value in self.metadata.items():
            text = f"{key}={value}"
            if "\n" in text or "," in key:
                raise DomainError(f"metadata entry {key!r} not representable")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def write_series(series: FigureSeries, path) -> None:
    lines = [f"# {k}={v}" for k, v in series.metadata.items()]
    lines.append(f"# axis={series.axis_label}")
    lines.append(f"# series={series.name}")
    lines.append(",".join(series.columns))
    for row in series.rows:
        lines.append(",".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_series(path) -> FigureSeries:
    metadata: dict = {}
    columns = None
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                metadata[key.strip()] = value
                continue
            if columns is None:
                columns = tuple(line.split(","))
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if columns is None or not rows:
        raise DomainError(f"{path} holds no data table")
    name = metadata.pop("series", "series")
    axis = metadata.pop("axis", columns[0])
    return FigureSeries(
        name=name, axis_label=axis, columns=columns,
        rows=np.asarray(rows, dtype=float), metadata=metadata,
    )
