"""Spectral dynamics of a particle in a sphere with a uniformly moving wall.

The wall radius is L(t) = 1 + 2*alpha*t in natural units (hbar = mass =
initial radius = 1), so the wall speed is u = 2*alpha and the single
geometry input is alpha: negative values contract the sphere, positive
values expand it.

Modes
    The frozen-wall eigenfunctions are

        u_lnm(r, t) = sqrt(2/L^3) j_l(x_ln r/L) / |j_{l+1}(x_ln)| Y_lm,

    with x_ln the n-th zero of j_l and energies E_ln = x_ln^2 / (2 xi^2),
    xi(t) = L(t).  For a uniformly moving wall the full time-dependent
    problem has closed-form solutions: each u_lnm times the coordinate
    dependent phase exp[i alpha xi (r/L)^2 - i theta_ln(t)], where
    theta_ln(t) = x_ln^2 t / (2 xi(t)).  (The equivalent form
    x^2 (1 - 1/xi) / (4 alpha) is singular at alpha = 0 and is avoided.)

Expansions
    An initial state fixes time-independent coefficients c_n' of the
    exact modes (SpectralState).  Observables in the instantaneous basis
    need the time-dependent coefficients b_n'(t), obtained from c by a
    unitary transform built from chirped overlap integrals at chirp rate
    beta = alpha * xi(t) (InstantCoeffs).  Energy expectation values,
    transition probabilities and radial densities all derive from these.

Frames
    Figure axes use mode-scaled units: position eta = r/wavelength and
    time T = frequency * t, with the classical flight times of a particle
    moving at the mode speed.  ``observation_frame`` bundles them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import spherical_jn

from .errors import DomainError, TruncationError
from .oscint import QuadratureSettings, overlap_block, overlap_matrix
from .specfun import BesselZeroTable, ModeIndex, shared_zero_table, sph_harmonic

#: Queries with xi(t) at or below this are rejected: energies scale as
#: 1/xi^2 and the truncated expansion loses meaning near wall collapse.
XI_MIN = 0.05

_DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class TrapGeometry:
    """Uniformly moving hard wall, L(t) = 1 + 2*alpha*t."""

    alpha: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha):
            raise DomainError("alpha must be finite")

    @property
    def wall_speed(self) -> float:
        return 2.0 * self.alpha

    def wall_radius(self, t):
        """L(t); raises on times past (or at) wall collapse."""
        xi = 1.0 + 2.0 * self.alpha * np.asarray(t, dtype=float)
        if np.any(xi <= XI_MIN):
            raise DomainError(
                f"wall radius {np.min(xi):.4g} at or below the supported "
                f"minimum {XI_MIN} (alpha={self.alpha:g})"
            )
        return float(xi) if np.isscalar(t) else xi

    def xi(self, t):
        """Wall radius in units of the initial radius; identical to L here."""
        return self.wall_radius(t)

    def tau(self, t):
        """Scaled time t/xi(t), monotone on the valid domain."""
        return t / self.wall_radius(t)

    def time_at_xi(self, xi: float) -> float:
        """Inverse of xi(t); requires alpha != 0."""
        if xi <= XI_MIN:
            raise DomainError(f"xi={xi:g} at or below the supported minimum {XI_MIN}")
        if self.alpha == 0.0:
            raise DomainError("xi is constant for a static wall")
        return (xi - 1.0) / (2.0 * self.alpha)


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Expansion of a state over the exact moving-wall modes at fixed (l, m).

    ``c[k]`` is the coefficient of radial index k+1; the coefficients do
    not change in time.  ``input_norm`` records the norm of the projected
    input before renormalization (1.0 for eigenstate initial conditions).
    """

    l: int
    m: int
    c: np.ndarray
    geometry: TrapGeometry
    n_trunc: int
    table: BesselZeroTable
    input_norm: float = 1.0

    def __post_init__(self) -> None:
        if abs(self.m) > self.l:
            raise DomainError(f"|m|={abs(self.m)} exceeds l={self.l}")
        if self.c.shape != (self.n_trunc,):
            raise DomainError("coefficient vector length must equal n_trunc")

    @property
    def weight(self) -> float:
        """Sum of |c|^2 captured by the truncation."""
        return float(np.sum(np.abs(self.c) ** 2))


@dataclass(frozen=True, eq=False)
class InstantCoeffs:
    """Instantaneous-basis coefficients b(t) at one time.

    ``truncation_tail`` estimates the first omitted |b|^2 by the last
    kept coefficient magnitude.
    """

    b: np.ndarray
    t: float
    truncation_tail: float


@dataclass(frozen=True)
class ObservationFrame:
    """Mode-scaled units for figure axes, tied to one (l, n) and one r0.

    Lengths are measured in the mode wavelength 2*pi/x_ln, times in the
    mode period 1/frequency; ``alpha_scale`` is the alpha at which the
    wall speed equals the mode speed, the natural adiabatic/sudden knob.
    ``flight_near``/``flight_far`` are the scaled classical flight times
    from the near edge (r = 1) and far edge (path length r0 + 1) of the
    initial sphere to the observation radius r0.  ``wall_time`` is 1/u
    (infinite for a static wall) and ``t_reach`` the moment the wall
    passes r0.
    """

    mode: ModeIndex
    r0: float
    wavelength: float
    frequency: float
    alpha_scale: float
    mode_speed: float
    eta0: float
    flight_near: float
    flight_far: float
    wall_time: float
    internal_time: float
    t_reach: float


# =========================================================================
# Modes
# =========================================================================


def _mode_zero(mode_l: int, mode_n: int, table: BesselZeroTable | None):
    if table is None:
        table = shared_zero_table(mode_l, mode_n)
    return table, table.zero(mode_l, mode_n), abs(table.j_next_at_zero(mode_l, mode_n))


def _check_inside(r, wall: float) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("radius must be >= 0")
    if np.any(arr > wall * (1.0 + 1e-12)):
        raise DomainError(
            f"radius {np.max(arr):.6g} outside the sphere (wall at {wall:.6g})"
        )
    return arr


def instantaneous_mode(
    geom: TrapGeometry,
    mode: ModeIndex,
    r,
    t: float,
    theta: float | None = None,
    phi: float | None = None,
    table: BesselZeroTable | None = None,
):
    """Frozen-wall eigenfunction u_lnm at time t.

    With ``theta``/``phi`` omitted, returns the radial factor only (real);
    the full mode is that factor times Y_lm.  Radii outside the current
    wall are errors so that grid bugs surface instead of silently reading
    zero amplitude.
    """
    table, x, jnext = _mode_zero(mode.l, mode.n, table)
    wall = geom.wall_radius(t)
    arr = _check_inside(r, wall)
    radial = math.sqrt(2.0 / wall**3) / jnext * spherical_jn(mode.l, x * arr / wall)
    if np.isscalar(r):
        radial = float(radial)
    if theta is None:
        return radial
    return radial * sph_harmonic(mode.l, mode.m, theta, phi)


def instantaneous_energy(
    geom: TrapGeometry,
    l: int,
    n: int,
    t: float,
    table: BesselZeroTable | None = None,
) -> float:
    """Energy of the frozen-wall level (l, n) at time t: x_ln^2 / (2 xi^2)."""
    _, x, _ = _mode_zero(l, n, table)
    xi = geom.xi(t)
    return x * x / (2.0 * xi * xi)


def mode_phase(geom: TrapGeometry, x_ln, r, t: float):
    """Phase factor of the exact mode: exp[i alpha xi (r/L)^2 - i theta].

    theta = x_ln^2 t / (2 xi(t)); both pieces stay finite at alpha = 0.
    """
    wall = geom.wall_radius(t)
    xi = wall
    s = np.asarray(r, dtype=float) / wall
    theta = np.asarray(x_ln, dtype=float) ** 2 * t / (2.0 * xi)
    return np.exp(1j * (geom.alpha * xi * s * s - theta))


def exact_mode(
    geom: TrapGeometry,
    mode: ModeIndex,
    r,
    t: float,
    theta: float | None = None,
    phi: float | None = None,
    table: BesselZeroTable | None = None,
):
    """Closed-form solution of the moving-wall problem for one mode.

    Equal to ``instantaneous_mode`` times a coordinate-dependent phase;
    remains unit-normalized at every time.  Radial factor only (complex)
    unless angles are given.
    """
    table, x, _ = _mode_zero(mode.l, mode.n, table)
    radial = instantaneous_mode(geom, mode, r, t, table=table)
    value = radial * mode_phase(geom, x, r, t)
    if np.isscalar(r):
        value = complex(value)
    if theta is None:
        return value
    return value * sph_harmonic(mode.l, mode.m, theta, phi)


# =========================================================================
# Projection onto the exact-mode basis
# =========================================================================


def project_eigenstate_initial(
    geom: TrapGeometry,
    init: ModeIndex,
    n_trunc: int,
    settings: QuadratureSettings = _DEFAULT_SETTINGS,
    table: BesselZeroTable | None = None,
    tail_tol: float = 1e-4,
) -> SpectralState:
    """Expand the frozen-wall eigenstate ``init`` over the exact modes.

    The coefficients are chirped overlaps at beta = alpha (the chirp the
    wall motion imprints at t = 0):

        c_n' = 2 I(l, n, n', alpha) / (|j_{l+1}(x_ln)| |j_{l+1}(x_ln')|).

    Raises TruncationError when the captured weight falls below
    1 - tail_tol, signalling that n_trunc must grow.  Figure scenarios
    pinned to the ten-term truncation of fast contractions pass a looser
    ``tail_tol`` explicitly.
    """
    if n_trunc < init.n:
        raise DomainError("n_trunc must cover the initial radial index")
    if table is None:
        table = shared_zero_table(init.l, n_trunc)
    jnext = np.abs(table.j_next_row(init.l, n_trunc))
    row = overlap_block(
        init.l, np.arange(1, n_trunc + 1), [init.n], geom.alpha, settings, table
    )[:, 0]
    c = 2.0 * row / (jnext * jnext[init.n - 1])
    weight = float(np.sum(np.abs(c) ** 2))
    if weight < 1.0 - tail_tol:
        raise TruncationError(
            f"projection captures only {weight:.8f} of the norm at "
            f"n_trunc={n_trunc} (alpha={geom.alpha:g}); raise n_trunc"
        )
    return SpectralState(
        l=init.l, m=init.m, c=c, geometry=geom, n_trunc=n_trunc, table=table
    )


def project_general_initial(
    geom: TrapGeometry,
    l: int,
    m: int,
    r_grid,
    samples,
    n_trunc: int,
    table: BesselZeroTable | None = None,
) -> SpectralState:
    """Expand an arbitrary radial function at t = 0 over the exact modes.

    ``samples`` holds the complex radial profile on ``r_grid`` covering
    [0, 1]; the angular dependence is assumed to be a single Y_lm, whose
    integral is analytic.  The input must be normalized to 1e-6 (radial
    norm integral, Simpson on the provided grid); the projection then
    renormalizes and records the measured norm in ``input_norm``.
    """
    if table is None:
        table = shared_zero_table(l, n_trunc)
    r = np.asarray(r_grid, dtype=float)
    psi = np.asarray(samples, dtype=complex)
    if r.ndim != 1 or psi.shape != r.shape or r.size < 9:
        raise DomainError("need matching 1-D grids with at least 9 samples")
    if abs(r[0]) > 1e-12 or abs(r[-1] - 1.0) > 1e-12:
        raise DomainError("radial grid must span [0, 1]")
    norm = float(simpson(r * r * np.abs(psi) ** 2, x=r))
    if abs(norm - 1.0) > 1e-6:
        raise DomainError(f"input norm {norm:.8f} deviates from 1 by more than 1e-6")

    x = table.zeros_row(l, n_trunc)
    jnext = np.abs(table.j_next_row(l, n_trunc))
    modes = spherical_jn(l, np.multiply.outer(x, r))
    # Conjugate exact mode at t=0: chirp exp(-i alpha r^2) times j_l.
    weights = r * r * np.exp(-1j * geom.alpha * r * r) * psi
    c = math.sqrt(2.0) / jnext * simpson(modes * weights, x=r)
    c = c / math.sqrt(norm)
    return SpectralState(
        l=l,
        m=m,
        c=c,
        geometry=geom,
        n_trunc=n_trunc,
        table=table,
        input_norm=norm,
    )


# =========================================================================
# Instantaneous coefficients and observables
# =========================================================================


def instantaneous_coeffs(
    state: SpectralState,
    t: float,
    settings: QuadratureSettings = _DEFAULT_SETTINGS,
) -> InstantCoeffs:
    """Coefficients b(t) of the evolving state in the frozen-wall basis.

    b_n'(t) = [2/|j_{l+1}(x_ln')|] sum_n'' c_n'' [1/|j_{l+1}(x_ln'')|]
              exp(-i theta_n''(t)) conj(I(l, n', n'', alpha*xi)).

    At t = 0 this collapses to b = c-resolved identity for eigenstate
    initial conditions, up to the truncation tail.
    """
    geom = state.geometry
    xi = geom.xi(t)
    x = state.table.zeros_row(state.l, state.n_trunc)
    jnext = np.abs(state.table.j_next_row(state.l, state.n_trunc))
    overlaps = overlap_matrix(state.l, state.n_trunc, geom.alpha * xi, settings, state.table)
    theta = x * x * t / (2.0 * xi)
    b = (2.0 / jnext) * (np.conj(overlaps) @ (state.c * np.exp(-1j * theta) / jnext))
    tail = float(np.abs(b[-1]) ** 2)
    return InstantCoeffs(b=b, t=float(t), truncation_tail=tail)


def energy_expectation(
    state: SpectralState,
    t: float,
    settings: QuadratureSettings = _DEFAULT_SETTINGS,
    coeffs: InstantCoeffs | None = None,
) -> tuple[float, float]:
    """Energy expectation at time t and its ratio to the lowest level.

    Returns (energy, ratio) with energy = sum |b|^2 E_ln'(t) and ratio
    the same sum over (x_ln'/x_l1)^2, which is time-free.  The ratio is
    >= 1 whenever the state started in the lowest included level.
    """
    if coeffs is None:
        coeffs = instantaneous_coeffs(state, t, settings)
    x = state.table.zeros_row(state.l, state.n_trunc)
    xi = state.geometry.xi(t)
    weights = np.abs(coeffs.b) ** 2
    energy = float(np.sum(weights * x * x) / (2.0 * xi * xi))
    ratio = float(np.sum(weights * (x / x[0]) ** 2))
    return energy, ratio


def radial_wavefunction(state: SpectralState, r, t: float):
    """Radial factor R(r, t) of the evolving state (times Y_lm implied)."""
    geom = state.geometry
    wall = geom.wall_radius(t)
    arr = _check_inside(r, wall)
    x = state.table.zeros_row(state.l, state.n_trunc)
    jnext = np.abs(state.table.j_next_row(state.l, state.n_trunc))
    modes = spherical_jn(state.l, np.multiply.outer(x, arr / wall))
    theta = x * x * t / (2.0 * wall)
    amps = state.c * np.exp(-1j * theta) / jnext
    chirp = np.exp(1j * geom.alpha * wall * (arr / wall) ** 2)
    out = math.sqrt(2.0 / wall**3) * chirp * (amps @ modes)
    return complex(out) if np.isscalar(r) else out


def observation_frame(geom: TrapGeometry, mode: ModeIndex, r0: float) -> ObservationFrame:
    """Scaled units of the (l, n) mode for observation at radius r0."""
    if r0 <= 0.0:
        raise DomainError("observation radius must be positive")
    table = shared_zero_table(mode.l, mode.n)
    x = table.zero(mode.l, mode.n)
    wavelength = 2.0 * math.pi / x
    frequency = x * x / (4.0 * math.pi)
    speed = geom.wall_speed
    return ObservationFrame(
        mode=mode,
        r0=r0,
        wavelength=wavelength,
        frequency=frequency,
        alpha_scale=x / 2.0,
        mode_speed=x,
        eta0=r0 / wavelength,
        flight_near=x * (r0 - 1.0) / (4.0 * math.pi),
        flight_far=x * (r0 + 1.0) / (4.0 * math.pi),
        wall_time=math.inf if speed == 0.0 else 1.0 / speed,
        internal_time=1.0 / x,
        t_reach=math.inf if speed == 0.0 else (r0 - 1.0) / speed,
    )


def density_vs_radius(
    state: SpectralState,
    frame: ObservationFrame,
    eta,
    t: float,
    clip: bool = False,
) -> np.ndarray:
    """Scaled radial density rho(eta) = wavelength^3 eta^2 |R|^2 at time t.

    eta = r / wavelength.  Points outside the current wall are errors
    unless ``clip`` is set, in which case they contribute exact zeros
    (the amplitude vanishes outside a hard wall); clipping is what figure
    overlays of walls at different radii use.
    """
    eta_arr = np.asarray(eta, dtype=float)
    r = eta_arr * frame.wavelength
    wall = state.geometry.wall_radius(t)
    if clip:
        inside = r <= wall
        rho = np.zeros_like(eta_arr)
        if np.any(inside):
            amp = radial_wavefunction(state, r[inside], t)
            rho[inside] = frame.wavelength**3 * eta_arr[inside] ** 2 * np.abs(amp) ** 2
        return rho
    amp = radial_wavefunction(state, r, t)
    return frame.wavelength**3 * eta_arr**2 * np.abs(amp) ** 2


def density_vs_time(state: SpectralState, frame: ObservationFrame, T) -> np.ndarray:
    """Scaled density at the fixed radius frame.r0 against scaled time T.

    T = frequency * t.  Times at which the wall has not yet reached r0
    give exactly zero: the wavefunction vanishes outside the sphere.
    """
    T_arr = np.asarray(T, dtype=float)
    t_vals = T_arr / frame.frequency
    rho = np.zeros_like(T_arr)
    walls = state.geometry.wall_radius(t_vals)
    inside = frame.r0 <= walls
    for i in np.nonzero(inside)[0]:
        amp = radial_wavefunction(state, frame.r0, float(t_vals[i]))
        rho[i] = frame.wavelength**3 * frame.eta0**2 * abs(amp) ** 2
    return rho


def density_overlap(eta, rho_a, rho_b) -> float:
    """Bhattacharyya overlap of two scaled densities on a common eta grid.

    Equals 1 for identical normalized densities, < 1 otherwise; used for
    the adiabatic and sudden comparisons.
    """
    return float(simpson(np.sqrt(np.asarray(rho_a) * np.asarray(rho_b)), x=np.asarray(eta)))
