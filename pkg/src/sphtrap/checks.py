"""Verification routines shared by the test suite and the selfcheck command.

Each check here is an independent route through the math: finite
differences against closed-form modes, naive quadrature against the
panel-refined engine, explicit summation against assembled kernels.
They return measured deviations; callers decide on tolerances.
"""

from __future__ import annotations

import importlib.resources
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import spherical_jn

from .dynamics import (
    TrapGeometry,
    energy_expectation,
    exact_mode,
    instantaneous_coeffs,
    project_eigenstate_initial,
)
from .errors import CacheError, DomainError, TruncationWarning
from .oscint import (
    QuadratureSettings,
    mode_overlap_integral,
    read_overlap_golden,
    riemann_oracle,
)
from .propagator import full_kernel, kernel_1d, propagate, wall_graded_grid
from .specfun import ModeIndex, build_zero_table, load_zero_table


def pde_residual(
    geom: TrapGeometry,
    mode: ModeIndex,
    t0: float,
    spacing: float,
    r_window: tuple[float, float] = (0.25, 0.75),
    probes: int = 24,
) -> float:
    """Max Schroedinger-equation residual of the exact mode at spacing h.

    Central differences approximate i dPsi/dt + (1/2)(Psi_rr + 2 Psi_r/r
    - l(l+1) Psi/r^2) at ``probes`` interior radii; the result decays as
    h^2 since the mode solves the equation exactly.
    """
    wall = geom.wall_radius(t0)
    r = np.linspace(r_window[0] * wall, r_window[1] * wall, probes)
    h = spacing
    if r[0] - h <= 0.0 or r[-1] + h >= wall:
        raise DomainError("stencil leaves the sphere interior")

    def psi(rr, tt):
        return exact_mode(geom, mode, rr, tt)

    c0 = psi(r, t0)
    d_t = (psi(r, t0 + h) - psi(r, t0 - h)) / (2.0 * h)
    plus, minus = psi(r + h, t0), psi(r - h, t0)
    d_rr = (plus - 2.0 * c0 + minus) / (h * h)
    d_r = (plus - minus) / (2.0 * h)
    l = mode.l
    residual = 1j * d_t + 0.5 * (d_rr + 2.0 * d_r / r - l * (l + 1) * c0 / (r * r))
    return float(np.abs(residual).max())


def pde_convergence_order(
    geom: TrapGeometry,
    mode: ModeIndex,
    t0: float,
    spacings=(4e-4, 2e-4, 1e-4),
) -> tuple[float, list[float]]:
    """Least-squares convergence order of the residual over ``spacings``.

    Returns (order, residuals); the order is the slope of log(residual)
    against log(h), near 2 for a solution of the equation.
    """
    res = [pde_residual(geom, mode, t0, h) for h in spacings]
    slope = np.polyfit(np.log(np.asarray(spacings)), np.log(np.asarray(res)), 1)[0]
    return float(slope), res


# =========================================================================
# Named invariant suites (shared by the selfcheck command and tests)
# =========================================================================


@dataclass(frozen=True)
class CheckResult:
    """One named invariant with its measured deviation and verdict."""

    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        text = (
            f"{state} {self.name}: measured {self.measured:.3e} "
            f"(tolerance {self.tolerance:.1e})"
        )
        return text + (f" - {self.detail}" if self.detail else "")


def check_zero_table(l_max: int = 50, n_max: int = 100) -> list:
    """Monopole zeros at n*pi, interlacing across orders, build time."""
    start = time.perf_counter()
    table = build_zero_table(l_max, n_max)
    elapsed = time.perf_counter() - start
    n = np.arange(1, n_max + 1)
    monopole_err = float(np.abs(table.zeros_row(0, n_max) - n * math.pi).max())
    interlace_ok = True
    worst_gap = math.inf
    for l in range(1, l_max + 1):
        lower = table.zeros_row(l - 1, n_max)
        upper = table.zeros_row(l, n_max)
        gaps = np.concatenate([upper - lower, lower[1:] - upper[:-1]])
        worst_gap = min(worst_gap, float(gaps.min()))
        if gaps.min() <= 0.0:
            interlace_ok = False
    return [
        CheckResult("zero_table_monopole", monopole_err <= 1e-12, monopole_err, 1e-12),
        CheckResult(
            "zero_table_interlacing", interlace_ok, worst_gap, 0.0,
            detail=f"smallest bracket gap over l<={l_max}, n<={n_max}",
        ),
        CheckResult(
            "zero_table_build_time", elapsed < 5.0, elapsed, 5.0, detail="seconds"
        ),
    ]


def check_orthogonality(count: int = 300, seed: int = 20260814) -> CheckResult:
    """Radial orthonormality on ``count`` deterministic (l, n, n') triples."""
    rng = np.random.default_rng(seed)
    table = build_zero_table(12, 40)
    nodes, weights = np.polynomial.legendre.leggauss(24)
    panels = 160
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    s = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (np.broadcast_to(weights, (panels, weights.size)) * half[:, None]).ravel()
    worst = 0.0
    for _ in range(count):
        l = int(rng.integers(0, 13))
        n_a = int(rng.integers(1, 41))
        n_b = int(rng.integers(1, 41))
        x_a, x_b = table.zero(l, n_a), table.zero(l, n_b)
        norm_a = abs(table.j_next_at_zero(l, n_a))
        norm_b = abs(table.j_next_at_zero(l, n_b))
        vals = (
            2.0 / (norm_a * norm_b)
            * spherical_jn(l, x_a * s) * spherical_jn(l, x_b * s) * s * s
        )
        integral = float(np.sum(w * vals))
        expected = 1.0 if n_a == n_b else 0.0
        worst = max(worst, abs(integral - expected))
    return CheckResult("radial_orthonormality", worst <= 1e-10, worst, 1e-10)


def check_overlap_goldens(path) -> list:
    """Frozen goldens vs the panel engine and vs a fresh 1e6-point oracle."""
    entries = read_overlap_golden(path)
    settings = QuadratureSettings()
    table = build_zero_table(6, 12)
    engine_worst = 0.0
    oracle_worst = 0.0
    for req, frozen in entries:
        engine = mode_overlap_integral(req, settings, table)
        engine_worst = max(engine_worst, abs(engine - frozen))
        x_row = table.zero(req.l, req.n_row)
        x_col = table.zero(req.l, req.n_col)

        def integrand(s, l=req.l, xr=x_row, xc=x_col, beta=req.beta):
            return (
                s * s * np.exp(-1j * beta * s * s)
                * spherical_jn(l, xr * s) * spherical_jn(l, xc * s)
            )

        fresh = riemann_oracle(integrand, 1_000_000)
        oracle_worst = max(oracle_worst, abs(fresh - frozen))
    return [
        CheckResult("overlap_golden_engine", engine_worst <= 1e-12, engine_worst, 1e-12),
        CheckResult("overlap_golden_oracle", oracle_worst <= 1e-8, oracle_worst, 1e-8),
    ]


def check_pde_suite() -> CheckResult:
    """Second-order residual decay for six modes at three wall speeds."""
    modes = [
        ModeIndex(0, 1, 0), ModeIndex(0, 3, 0), ModeIndex(1, 1, 0),
        ModeIndex(1, 2, 1), ModeIndex(2, 2, 0), ModeIndex(3, 1, 2),
    ]
    worst_dev = 0.0
    for alpha in (-1.5, 0.4, 2.0):
        geom = TrapGeometry(alpha)
        for mode in modes:
            order, _ = pde_convergence_order(geom, mode, t0=0.12)
            worst_dev = max(worst_dev, abs(order - 2.0))
    return CheckResult(
        "pde_residual_order", worst_dev <= 0.2, worst_dev, 0.2,
        detail="max |order - 2| over 6 modes x 3 speeds",
    )


def _unitarity_sweep(alpha: float, n_small: int, n_big: int, xi_grid) -> tuple:
    """(worst norm deficit at n_small, worst shift of the four leading
    level populations between the two truncations) over the xi grid."""
    geom = TrapGeometry(alpha)
    small = project_eigenstate_initial(geom, ModeIndex(1, 1, 0), n_small, tail_tol=1e-2)
    big = project_eigenstate_initial(geom, ModeIndex(1, 1, 0), n_big, tail_tol=1e-2)
    worst_norm = 0.0
    worst_shift = 0.0
    for xi in xi_grid:
        t = 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
        b_small = instantaneous_coeffs(small, t).b
        b_big = instantaneous_coeffs(big, t).b
        worst_norm = max(worst_norm, abs(np.sum(np.abs(b_small) ** 2) - 1.0))
        worst_shift = max(
            worst_shift,
            float(np.abs(np.abs(b_small[:4]) ** 2 - np.abs(b_big[:4]) ** 2).max()),
        )
    return worst_norm, worst_shift


def check_unitarity_suite() -> list:
    """Norm retention and N-doubling stability at adequate truncations.

    Ten terms genuinely suffice only up to |alpha| = 4 (worst deficit
    3.4e-4 at xi = 0.95).  The alpha = -6 contraction sheds 2.2e-3 at
    xi = 0.90 and alpha = -10 sheds 3.3e-2 at xi = 0.8, so both are
    checked at N = 20 where they hold the same 1e-3 bar.  The energy
    ratio needs N = 50 before halving the basis moves it by < 1e-3.
    """
    results = []
    xi_grid = np.linspace(1.0, 0.3, 15)
    worst_norm = 0.0
    worst_shift = 0.0
    for alpha in (-2.0, -4.0):
        norm_dev, shift = _unitarity_sweep(alpha, 10, 20, xi_grid)
        worst_norm = max(worst_norm, norm_dev)
        worst_shift = max(worst_shift, shift)
    results.append(
        CheckResult("transition_norm_n10", worst_norm <= 1e-3, worst_norm, 1e-3,
                    detail="alpha in {-2,-4}")
    )
    results.append(
        CheckResult("transition_doubling_n10", worst_shift <= 1e-3, worst_shift, 1e-3,
                    detail="alpha in {-2,-4}")
    )
    worst_norm = 0.0
    worst_shift = 0.0
    for alpha in (-6.0, -10.0):
        norm_dev, shift = _unitarity_sweep(alpha, 20, 40, xi_grid)
        worst_norm = max(worst_norm, norm_dev)
        worst_shift = max(worst_shift, shift)
    results.append(
        CheckResult("transition_norm_fast_n20", worst_norm <= 1e-3, worst_norm, 1e-3,
                    detail="alpha in {-6,-10}")
    )
    results.append(
        CheckResult("transition_doubling_fast_n20", worst_shift <= 1e-3, worst_shift,
                    1e-3, detail="alpha in {-6,-10}")
    )
    worst_ratio_shift = 0.0
    for alpha in (-2.0, -4.0, -6.0):
        geom = TrapGeometry(alpha)
        small = project_eigenstate_initial(geom, ModeIndex(1, 1, 0), 50, tail_tol=1e-2)
        big = project_eigenstate_initial(geom, ModeIndex(1, 1, 0), 100, tail_tol=1e-2)
        for xi in xi_grid:
            t = 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
            r_small = energy_expectation(small, t)[1]
            r_big = energy_expectation(big, t)[1]
            worst_ratio_shift = max(worst_ratio_shift, abs(r_small - r_big))
    results.append(
        CheckResult(
            "energy_ratio_doubling_n50",
            worst_ratio_shift <= 1e-3, worst_ratio_shift, 1e-3,
        )
    )
    return results


def check_identity_collapse(n_trunc: int = 80, leading: int = 10) -> CheckResult:
    """b(0) collapses to the identity on the leading components."""
    state = project_eigenstate_initial(TrapGeometry(-2.0), ModeIndex(1, 1, 0), n_trunc)
    b = instantaneous_coeffs(state, 0.0).b
    dev = b.copy()
    dev[0] -= 1.0
    worst = float(np.abs(dev[:leading]).max())
    return CheckResult(
        f"identity_collapse_n{n_trunc}", worst <= 1e-8, worst, 1e-8,
        detail=f"leading {leading} components",
    )


def check_propagator_equivalence(alpha: float = 0.5, n_max: int = 200) -> CheckResult:
    """kernel_1d against the rescaled monopole channel on a 5x5 grid."""
    geom = TrapGeometry(alpha)
    t, tp = 0.4, 0.1
    wall, wall_p = geom.wall_radius(t), geom.wall_radius(tp)
    worst = 0.0
    for fx in np.linspace(0.1, 0.9, 5):
        for fxp in np.linspace(0.1, 0.9, 5):
            x, xp = fx * wall, fxp * wall_p
            one_d = kernel_1d(geom, x, t, xp, tp, n_max)
            mono = full_kernel(geom, x, 0.2, 0.9, t, xp, 1.3, 4.1, tp, 0, n_max)
            worst = max(worst, abs(one_d - 4.0 * math.pi * x * xp * mono))
    return CheckResult("kernel_1d_equivalence", worst <= 1e-10, worst, 1e-10)


def check_mode_fidelity(n_max: int = 40) -> tuple:
    """Fidelity of propagated exact modes; also reports the norm deficit."""
    worst = 0.0
    deficit = 0.0
    with warnings.catch_warnings():
        # The deficit is measured and reported below; the per-call
        # truncation warnings would only repeat it.
        warnings.simplefilter("ignore", TruncationWarning)
        for alpha in (-10.0, 10.0):
            geom = TrapGeometry(alpha)
            t = geom.time_at_xi(1.4 if alpha > 0 else 0.7)
            wall = geom.wall_radius(t)
            grid = wall_graded_grid(1.0, max(64, 4 * n_max))
            eval_grid = wall_graded_grid(wall, max(64, 4 * n_max))
            wr2_in = grid.weights * grid.nodes**2
            wr2 = eval_grid.weights * eval_grid.nodes**2
            for l in (0, 1, 2):
                for n in (1, 3, 5):
                    mode = ModeIndex(l, n, 0)
                    psi0 = exact_mode(geom, mode, grid.nodes, 0.0)
                    out = propagate(
                        geom, l, 0, psi0, 0.0, t, n_max, grid, eval_r=eval_grid.nodes
                    )
                    ref = exact_mode(geom, mode, eval_grid.nodes, t)
                    overlap = np.sum(wr2 * np.conj(ref) * out)
                    worst = max(worst, 1.0 - abs(overlap))
                    out_norm = float(np.real(np.sum(wr2 * np.abs(out) ** 2)))
                    in_norm = float(np.real(np.sum(wr2_in * np.abs(psi0) ** 2)))
                    deficit = max(deficit, in_norm - out_norm)
    result = CheckResult(
        f"mode_fidelity_n{n_max}", worst <= 1e-6, worst, 1e-6,
        detail=f"worst norm deficit {deficit:.3e}",
    )
    return result, deficit


def check_composition(n_max: int = 30) -> CheckResult:
    """Two-stage propagation equals the direct map on band-limited data."""
    geom = TrapGeometry(-1.0)
    t1, t2 = geom.time_at_xi(0.8), geom.time_at_xi(0.6)
    grid0 = wall_graded_grid(1.0, max(64, 4 * n_max))
    grid1 = wall_graded_grid(0.8, max(64, 4 * n_max))
    grid2 = wall_graded_grid(0.6, max(64, 4 * n_max))
    mix = (
        exact_mode(geom, ModeIndex(1, 1, 0), grid0.nodes, 0.0)
        + exact_mode(geom, ModeIndex(1, 3, 0), grid0.nodes, 0.0)
    ) / math.sqrt(2.0)
    direct = propagate(geom, 1, 0, mix, 0.0, t2, n_max, grid0, eval_r=grid2.nodes)
    staged = propagate(geom, 1, 0, mix, 0.0, t1, n_max, grid0, eval_r=grid1.nodes)
    staged = propagate(geom, 1, 0, staged, t1, t2, n_max, grid1, eval_r=grid2.nodes)
    worst = float(np.abs(direct - staged).max())
    return CheckResult("propagation_composition", worst <= 2e-6, worst, 2e-6)


def check_static_reduction(n_max: int = 60) -> CheckResult:
    """kernel_1d at alpha = 0 equals the stationary-box sine series."""
    geom = TrapGeometry(0.0)
    x, xp, dt = 0.3, 0.8, 0.37
    n = np.arange(1, n_max + 1)
    expected = 2.0 * np.sum(
        np.exp(-1j * n * n * math.pi**2 * dt / 2.0)
        * np.sin(n * math.pi * x) * np.sin(n * math.pi * xp)
    )
    got = kernel_1d(geom, x, dt, xp, 0.0, n_max)
    dev = abs(got - expected)
    return CheckResult("kernel_1d_static_reduction", dev <= 1e-12, dev, 1e-12)


def check_zero_cache(path) -> CheckResult:
    """Revalidate an on-disk zero table; any corruption must fail loudly."""
    try:
        load_zero_table(path)
    except CacheError as exc:
        return CheckResult("zero_cache_revalidation", False, math.inf, 0.0, str(exc))
    return CheckResult("zero_cache_revalidation", True, 0.0, 0.0)


def run_selfcheck(golden_path=None, cache_path=None) -> tuple:
    """Full invariant sweep; returns (results, elapsed_seconds)."""
    if golden_path is None:
        golden_path = importlib.resources.files("sphtrap") / "data" / "overlap_golden.csv"
    start = time.perf_counter()
    results = []
    results.extend(check_zero_table())
    results.append(check_orthogonality())
    results.extend(check_overlap_goldens(golden_path))
    results.append(check_pde_suite())
    results.extend(check_unitarity_suite())
    results.append(check_identity_collapse())
    results.append(check_propagator_equivalence())
    results.append(check_mode_fidelity()[0])
    results.append(check_composition())
    results.append(check_static_reduction())
    if cache_path is not None:
        results.append(check_zero_cache(cache_path))
    return results, time.perf_counter() - start
