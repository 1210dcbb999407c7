"""Exact quantum dynamics of a particle in a sphere with a moving wall.

The wall radius grows (or shrinks) linearly in time, L(t) = a + u*t, and
the problem admits exact time-dependent modes.  This package evaluates
those modes, expands arbitrary initial states in them, and exposes the
derived quantities: transition probabilities, energy expectation values,
radial probability densities in scaled coordinates, and the spectral
propagator together with its one-dimensional reduction.

Natural units are used throughout: hbar = mass = initial radius = 1.
The single geometry parameter is alpha = u/2 (half the wall speed), so
L(t) = 1 + 2*alpha*t.
"""

from .dynamics import (
    InstantCoeffs,
    ObservationFrame,
    SpectralState,
    TrapGeometry,
    density_overlap,
    density_vs_radius,
    density_vs_time,
    energy_expectation,
    exact_mode,
    instantaneous_coeffs,
    instantaneous_energy,
    instantaneous_mode,
    mode_phase,
    observation_frame,
    project_eigenstate_initial,
    project_general_initial,
    radial_wavefunction,
)
from .errors import (
    BracketError,
    CacheError,
    DomainError,
    QuadratureError,
    TruncationError,
    TruncationWarning,
)
from .oscint import (
    OverlapRequest,
    QuadratureSettings,
    mode_overlap_integral,
    overlap_block,
    overlap_matrix,
    read_overlap_golden,
    write_overlap_golden,
)
from .propagator import (
    KernelSample,
    RadialGrid,
    full_kernel,
    kernel_1d,
    propagate,
    radial_kernel,
    sample_full_kernel,
    wall_graded_grid,
)
from .specfun import (
    BesselZeroTable,
    ModeIndex,
    build_zero_table,
    load_zero_table,
    save_zero_table,
    shared_zero_table,
    sph_bessel_j,
    sph_bessel_j_prime,
    sph_harmonic,
)

__version__ = "0.1.0"

__all__ = [
    "BesselZeroTable",
    "BracketError",
    "CacheError",
    "DomainError",
    "InstantCoeffs",
    "KernelSample",
    "ModeIndex",
    "ObservationFrame",
    "OverlapRequest",
    "QuadratureError",
    "QuadratureSettings",
    "RadialGrid",
    "SpectralState",
    "TrapGeometry",
    "TruncationError",
    "TruncationWarning",
    "build_zero_table",
    "density_overlap",
    "density_vs_radius",
    "density_vs_time",
    "energy_expectation",
    "exact_mode",
    "full_kernel",
    "instantaneous_coeffs",
    "instantaneous_energy",
    "instantaneous_mode",
    "kernel_1d",
    "load_zero_table",
    "mode_overlap_integral",
    "mode_phase",
    "observation_frame",
    "overlap_block",
    "overlap_matrix",
    "project_eigenstate_initial",
    "project_general_initial",
    "propagate",
    "radial_kernel",
    "radial_wavefunction",
    "read_overlap_golden",
    "sample_full_kernel",
    "save_zero_table",
    "shared_zero_table",
    "sph_bessel_j",
    "sph_bessel_j_prime",
    "sph_harmonic",
    "wall_graded_grid",
    "write_overlap_golden",
    "__version__",
]
