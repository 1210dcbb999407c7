"""Oscillatory radial overlap integrals between sphere modes.

Problem
    Expanding states of the moving-wall sphere requires, over and over,
    the chirped two-mode overlap on the unit interval

        I(l, n_row, n_col, beta)
            = int_0^1 s^2 exp(-i beta s^2) j_l(x_{l,n_row} s) j_l(x_{l,n_col} s) ds

    where x_ln are the zeros of j_l.  beta is the chirp rate; at beta = 0
    the integral collapses to the orthogonality relation
    delta_{n_row,n_col} * j_{l+1}(x_{l,n_row})^2 / 2.  A closed form in
    Fresnel integrals exists but is numerically treacherous; quadrature
    with oscillation-aware panel counts is used instead.

Solution
    Composite Gauss-Legendre panels on [0, 1].  The integrand completes
    about (x_row + x_col + |beta|) / pi half-oscillations, so the initial
    panel count scales with that estimate and is doubled until two
    successive refinements agree to ``refinement_tolerance``.  The
    integrand magnitude never exceeds 1 on [0, 1] (|j_l| <= 1, s^2 <= 1),
    so |I| <= 1 always.

    ``overlap_block`` evaluates a whole grid of (n_row, n_col) pairs in
    one pass: the spherical Bessel factors form a (modes x nodes) matrix
    and every pair reduces to a weighted inner product.  The convergence
    criterion is then the max-norm over the block.

Oracle
    ``riemann_oracle`` is a deliberately naive midpoint rule kept as an
    independent cross-check; golden values are frozen to CSV with
    ``write_overlap_golden`` and revalidated against both routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import spherical_jn

from .errors import DomainError, QuadratureError
from .specfun import ORDER_MAX, BesselZeroTable


@dataclass(frozen=True)
class OverlapRequest:
    """One overlap integral: orders and chirp rate."""

    l: int
    n_row: int
    n_col: int
    beta: float

    def __post_init__(self) -> None:
        if not isinstance(self.l, (int, np.integer)) or not (0 <= self.l <= ORDER_MAX):
            raise DomainError(f"order l={self.l} outside [0, {ORDER_MAX}]")
        if self.n_row < 1 or self.n_col < 1:
            raise DomainError("radial indices must be >= 1")
        if not math.isfinite(self.beta):
            raise DomainError("chirp rate beta must be finite")


@dataclass(frozen=True)
class QuadratureSettings:
    """Panel-refinement policy for the overlap quadrature."""

    points_per_panel: int = 16
    min_panels: int = 8
    refinement_tolerance: float = 1e-11
    max_refinements: int = 12

    def __post_init__(self) -> None:
        if self.points_per_panel < 2 or self.min_panels < 1:
            raise DomainError("quadrature settings must be positive")
        if self.refinement_tolerance <= 0 or self.max_refinements < 0:
            raise DomainError("refinement policy must be positive")


@lru_cache(maxsize=8)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_rule(panel_count: int, points_per_panel: int):
    """Nodes and weights of a composite Gauss rule on [0, 1]."""
    x, w = _leggauss(points_per_panel)
    edges = np.linspace(0.0, 1.0, panel_count + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = np.broadcast_to(w[None, :], (panel_count, points_per_panel)) * half[:, None]
    return nodes, weights.ravel()


def composite_gauss(panel_count: int, points_per_panel: int, integrand) -> complex:
    """Fixed composite Gauss-Legendre integral of ``integrand`` over [0, 1].

    The integrand must accept a float array and return values of
    matching shape (real or complex).
    """
    if panel_count < 1 or points_per_panel < 2:
        raise DomainError("panel_count >= 1 and points_per_panel >= 2 required")
    nodes, weights = _panel_rule(panel_count, points_per_panel)
    return complex(np.sum(np.asarray(integrand(nodes)) * weights))


def riemann_oracle(integrand, point_count: int) -> complex:
    """Midpoint-rule integral of ``integrand`` over [0, 1].

    Slow on purpose: this is the independent cross-check for the Gauss
    route and for frozen golden values.
    """
    if point_count < 1:
        raise DomainError("point_count must be >= 1")
    s = (np.arange(point_count) + 0.5) / point_count
    return complex(np.sum(np.asarray(integrand(s)))) / point_count


def _initial_panels(x_max_sum: float, beta: float, settings: QuadratureSettings) -> int:
    return max(settings.min_panels, math.ceil((x_max_sum + abs(beta)) / math.pi))


def _block_once(
    l: int,
    x_rows: np.ndarray,
    x_cols: np.ndarray,
    beta: float,
    panel_count: int,
    points_per_panel: int,
) -> np.ndarray:
    nodes, weights = _panel_rule(panel_count, points_per_panel)
    chirp = weights * nodes**2 * np.exp(-1j * beta * nodes**2)
    j_rows = spherical_jn(l, np.multiply.outer(x_rows, nodes))
    if x_cols is x_rows:
        j_cols = j_rows
    else:
        j_cols = spherical_jn(l, np.multiply.outer(x_cols, nodes))
    return (j_rows * chirp) @ j_cols.T


def overlap_block(
    l: int,
    rows,
    cols,
    beta: float,
    settings: QuadratureSettings,
    table: BesselZeroTable,
) -> np.ndarray:
    """Matrix of overlaps I(l, n_row, n_col, beta) for all index pairs.

    ``rows`` and ``cols`` are 1-based radial indices.  Panel counts are
    doubled until the block max-norm change drops below the refinement
    tolerance; failure to converge raises QuadratureError with the last
    two estimates on record.
    """
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    if rows.size == 0 or cols.size == 0:
        raise DomainError("overlap block needs at least one row and column")
    x_rows = np.array([table.zero(l, int(n)) for n in rows])
    if rows.shape == cols.shape and np.array_equal(rows, cols):
        x_cols = x_rows
    else:
        x_cols = np.array([table.zero(l, int(n)) for n in cols])

    panels = _initial_panels(x_rows.max() + x_cols.max(), beta, settings)
    prev = _block_once(l, x_rows, x_cols, beta, panels, settings.points_per_panel)
    for _ in range(settings.max_refinements):
        panels *= 2
        cur = _block_once(l, x_rows, x_cols, beta, panels, settings.points_per_panel)
        if np.abs(cur - prev).max() <= settings.refinement_tolerance:
            return cur
        prev = cur
    scale = np.abs(prev).max()
    raise QuadratureError(
        f"overlap block (l={l}, beta={beta:g}) did not converge after "
        f"{settings.max_refinements} refinements; last estimates differ by "
        f"{np.abs(cur - prev).max():.3e} at block scale {scale:.3e}"
    )


def mode_overlap_integral(
    req: OverlapRequest,
    settings: QuadratureSettings,
    table: BesselZeroTable,
) -> complex:
    """Single chirped overlap integral I(l, n_row, n_col, beta)."""
    block = overlap_block(
        req.l, [req.n_row], [req.n_col], req.beta, settings, table
    )
    return complex(block[0, 0])


def overlap_matrix(
    l: int,
    count: int,
    beta: float,
    settings: QuadratureSettings,
    table: BesselZeroTable,
) -> np.ndarray:
    """Full symmetric overlap matrix for radial indices 1..count."""
    idx = np.arange(1, count + 1)
    return overlap_block(l, idx, idx, beta, settings, table)


# =========================================================================
# Golden values
# =========================================================================

_GOLDEN_HEADER = "l,n_row,n_col,beta,re,im"


def write_overlap_golden(path, entries) -> None:
    """Write (OverlapRequest, value) pairs as CSV with 17 significant digits."""
    lines = [_GOLDEN_HEADER]
    for req, val in entries:
        lines.append(
            f"{req.l},{req.n_row},{req.n_col},{req.beta:.17g},"
            f"{val.real:.17g},{val.imag:.17g}"
        )
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_overlap_golden(path):
    """Read golden overlap values written by ``write_overlap_golden``."""
    with open(path, "r", encoding="ascii") as fh:
        body = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    if not body or body[0] != _GOLDEN_HEADER:
        raise DomainError(f"golden file {path} missing '{_GOLDEN_HEADER}' header")
    entries = []
    for ln in body[1:]:
        l, n_row, n_col, beta, re, im = ln.split(",")
        req = OverlapRequest(int(l), int(n_row), int(n_col), float(beta))
        entries.append((req, complex(float(re), float(im))))
    return entries
