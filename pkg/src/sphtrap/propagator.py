"""Spectral propagator for the moving-wall sphere.

The kernel is the mode sum K = sum_lnm psi_lnm(r,t) psi*_lnm(r',t');
each term factorizes into a radial product and an angular product, so
the per-l radial kernel is the reusable building block.  The l = 0
channel, rescaled by 4*pi*r*r', is the textbook 1D moving-wall
propagator with the left wall fixed at the origin.

Pointwise values of the truncated sum are only meaningful applied to
band-limited data: the terms have unit modulus, so the series converges
distributionally, not pointwise.  ``propagate`` is therefore the primary
consumer; the pointwise evaluators exist for identity checks and for
inspecting the phase structure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import spherical_jn

from .dynamics import TrapGeometry
from .errors import DomainError, TruncationWarning
from .specfun import BesselZeroTable, sph_harmonic, shared_zero_table

__all__ = [
    "KernelSample",
    "RadialGrid",
    "radial_kernel",
    "full_kernel",
    "kernel_1d",
    "wall_graded_grid",
    "propagate",
    "KERNEL_N_MAX_DEFAULT",
]

KERNEL_N_MAX_DEFAULT = 200


@dataclass(frozen=True)
class KernelSample:
    """One evaluation of the truncated full kernel with its provenance."""

    value: complex
    l_max: int
    n_max: int
    point_pair: tuple  # (r, t, r_prime, t_prime)


@dataclass(frozen=True)
class RadialGrid:
    """Quadrature rule on [0, wall]: plain dr weights, no r^2 factor."""

    nodes: np.ndarray
    weights: np.ndarray
    wall: float

    def __post_init__(self) -> None:
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise DomainError("grid nodes and weights must be matching 1-d arrays")
        if self.nodes.size < 4:
            raise DomainError("quadrature grid needs at least 4 nodes")
        if self.nodes.min() < 0.0 or self.nodes.max() > self.wall * (1 + 1e-12):
            raise DomainError("grid nodes must lie in [0, wall]")


def _radial_profiles(
    geom: TrapGeometry,
    l: int,
    r: np.ndarray,
    t: float,
    n_max: int,
    table: BesselZeroTable,
) -> np.ndarray:
    """Matrix R_ln(r_k, t) of exact-mode radial factors, shape (n_max, len(r))."""
    wall = geom.wall_radius(t)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or np.any(r > wall * (1 + 1e-12)):
        raise DomainError(f"radial points must lie in [0, L(t)={wall:g}]")
    x = table.zeros_row(l, n_max)
    jnext = np.abs(table.j_next_row(l, n_max))
    modes = spherical_jn(l, np.multiply.outer(x, r / wall))
    theta = x * x * t / (2.0 * wall)
    chirp = np.exp(1j * geom.alpha * r * r / wall)
    amp = math.sqrt(2.0 / wall**3)
    return amp * (np.exp(-1j * theta)[:, None] / jnext[:, None]) * modes * chirp


def radial_kernel(
    geom: TrapGeometry,
    l: int,
    r: float,
    t: float,
    r_prime: float,
    t_prime: float,
    n_max: int = KERNEL_N_MAX_DEFAULT,
    table: BesselZeroTable | None = None,
) -> complex:
    """Per-l radial kernel: sum_n R_ln(r,t) conj(R_ln(r',t')).

    The angular factor sum_m Y Y* is stripped; multiply by it (or use
    ``full_kernel``) to recover the kernel of the full problem.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    if table is None:
        table = shared_zero_table(l, n_max)
    here = _radial_profiles(geom, l, np.array([float(r)]), t, n_max, table)
    there = _radial_profiles(geom, l, np.array([float(r_prime)]), t_prime, n_max, table)
    return complex(np.sum(here[:, 0] * np.conj(there[:, 0])))


def full_kernel(
    geom: TrapGeometry,
    r: float,
    theta: float,
    phi: float,
    t: float,
    r_prime: float,
    theta_prime: float,
    phi_prime: float,
    t_prime: float,
    l_max: int,
    n_max: int,
    table: BesselZeroTable | None = None,
) -> complex:
    """Truncated kernel sum over l <= l_max, n <= n_max and all m.

    The m-sum is performed explicitly over spherical harmonics; the
    addition-theorem shortcut must agree and is exercised in tests.
    """
    if l_max < 0 or n_max < 1:
        raise DomainError("l_max >= 0 and n_max >= 1 required")
    if table is None:
        table = shared_zero_table(l_max, n_max)
    total = 0.0 + 0.0j
    for l in range(l_max + 1):
        radial = radial_kernel(geom, l, r, t, r_prime, t_prime, n_max, table)
        angular = 0.0 + 0.0j
        for m in range(-l, l + 1):
            angular += sph_harmonic(l, m, theta, phi) * np.conj(
                sph_harmonic(l, m, theta_prime, phi_prime)
            )
        total += radial * angular
    return complex(total)


def sample_full_kernel(
    geom: TrapGeometry,
    point: tuple,
    point_prime: tuple,
    l_max: int,
    n_max: int,
    table: BesselZeroTable | None = None,
) -> KernelSample:
    """Evaluate ``full_kernel`` at (r,theta,phi,t) pairs, keeping provenance."""
    r, theta, phi, t = point
    rp, thetap, phip, tp = point_prime
    val = full_kernel(
        geom, r, theta, phi, t, rp, thetap, phip, tp, l_max, n_max, table
    )
    return KernelSample(value=val, l_max=l_max, n_max=n_max, point_pair=(r, t, rp, tp))


def kernel_1d(
    geom: TrapGeometry,
    x: float,
    t: float,
    x_prime: float,
    t_prime: float,
    n_max: int = KERNEL_N_MAX_DEFAULT,
) -> complex:
    """Spectral propagator of the 1D box whose right wall moves uniformly.

    Equals 4*pi * x * x' * full_kernel(l_max=0) at matched truncation:
    the l = 0 radial factors are sin(n pi x / L)/(n pi x / L) up to
    normalization, and |Y_00|^2 = 1/(4 pi).  The mode phase is written
    as n^2 pi^2 (t/L(t) - t'/L(t'))/2, which is regular at alpha = 0.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    wall = geom.wall_radius(t)
    wall_p = geom.wall_radius(t_prime)
    if not (0.0 <= x <= wall * (1 + 1e-12)):
        raise DomainError(f"x must lie in [0, L(t)={wall:g}]")
    if not (0.0 <= x_prime <= wall_p * (1 + 1e-12)):
        raise DomainError(f"x' must lie in [0, L(t')={wall_p:g}]")
    n = np.arange(1, n_max + 1)
    phase = np.exp(-1j * n * n * math.pi**2 * (geom.tau(t) - geom.tau(t_prime)) / 2.0)
    series = np.sum(
        phase * np.sin(n * math.pi * x / wall) * np.sin(n * math.pi * x_prime / wall_p)
    )
    chirp = np.exp(1j * geom.alpha * (x * x / wall - x_prime * x_prime / wall_p))
    return complex(2.0 / math.sqrt(wall * wall_p) * chirp * series)


def wall_graded_grid(
    wall: float, node_count: int, points_per_panel: int = 16
) -> RadialGrid:
    """Composite Gauss rule on [0, wall], nodes crowded toward the wall.

    Grading r = wall * sin(pi s / 2) compresses panels near r = wall
    where the highest retained modes oscillate fastest.
    """
    if wall <= 0.0:
        raise DomainError("wall must be positive")
    if node_count < 4:
        raise DomainError("node_count must be >= 4")
    panels = max(1, math.ceil(node_count / points_per_panel))
    gx, gw = np.polynomial.legendre.leggauss(points_per_panel)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    s = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    ds = (np.broadcast_to(gw[None, :], (panels, points_per_panel)) * half[:, None]).ravel()
    nodes = wall * np.sin(0.5 * math.pi * s)
    weights = ds * wall * 0.5 * math.pi * np.cos(0.5 * math.pi * s)
    return RadialGrid(nodes=nodes, weights=weights, wall=wall)


def propagate(
    geom: TrapGeometry,
    l: int,
    m: int,
    samples: np.ndarray,
    t_prime: float,
    t: float,
    n_max: int = 40,
    grid: RadialGrid | None = None,
    eval_r: np.ndarray | None = None,
    table: BesselZeroTable | None = None,
    norm_warn_tol: float = 1e-4,
) -> np.ndarray:
    """Apply the radial channel of the kernel to sampled data.

    ``samples`` holds the radial wavefunction at ``grid.nodes`` and time
    ``t_prime``; the result holds it at ``eval_r`` (default: the grid
    nodes rescaled to the wall at ``t``) and time ``t``.  ``m`` does not
    enter the radial kernel; it is accepted to mirror the state label.

    Each exact mode passes through unchanged, so the action reduces to
    moments against the modes at ``t_prime`` resummed at ``t``.  Warns
    with TruncationWarning when the first ``n_max`` modes miss more than
    ``norm_warn_tol`` of the input norm.
    """
    if abs(m) > l:
        raise DomainError(f"|m|={abs(m)} exceeds l={l}")
    wall_p = geom.wall_radius(t_prime)
    wall = geom.wall_radius(t)
    if grid is None:
        grid = wall_graded_grid(wall_p, max(64, 4 * n_max))
    if abs(grid.wall - wall_p) > 1e-12 * max(1.0, wall_p):
        raise DomainError("grid wall does not match L(t')")
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != grid.nodes.shape:
        raise DomainError("samples must match the quadrature nodes")
    if table is None:
        table = shared_zero_table(l, n_max)

    profiles_in = _radial_profiles(geom, l, grid.nodes, t_prime, n_max, table)
    wr2 = grid.weights * grid.nodes**2
    moments = (np.conj(profiles_in) * wr2[None, :]) @ samples

    input_norm = float(np.real(np.sum(wr2 * np.abs(samples) ** 2)))
    captured = float(np.sum(np.abs(moments) ** 2))
    if input_norm > 0.0 and input_norm - captured > norm_warn_tol * input_norm:
        warnings.warn(
            f"first {n_max} modes capture {captured:.6g} of input norm "
            f"{input_norm:.6g}; raise n_max",
            TruncationWarning,
            stacklevel=2,
        )

    if eval_r is None:
        eval_r = grid.nodes * (wall / wall_p)
    profiles_out = _radial_profiles(geom, l, np.asarray(eval_r, float), t, n_max, table)
    return moments @ profiles_out
