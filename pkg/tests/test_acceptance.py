"""Acceptance gate: every numbered contract claim at its stated tolerance.

One test per claim, each printing a PASS/FAIL line with the measured
values (run with -s or read the failure output).  Claims are asserted
verbatim, including the four whose stated tolerances the dynamics
cannot meet at the pinned truncations (3, 4, the prefactor half of 6,
and the monotonicity sub-claim of 7).  Those tests fail honestly with
the measured numbers instead of loosening the bound; the README's
acceptance notes give the convergence tables behind them.
"""

import importlib.resources
import math
import time

import numpy as np
import pytest

from sphtrap.checks import (
    check_mode_fidelity,
    check_orthogonality,
    check_overlap_goldens,
    check_pde_suite,
    check_zero_table,
    run_selfcheck,
)
from sphtrap.dynamics import (
    TrapGeometry,
    density_overlap,
    density_vs_radius,
    density_vs_time,
    energy_expectation,
    instantaneous_coeffs,
    instantaneous_mode,
    observation_frame,
    project_eigenstate_initial,
)
from sphtrap.errors import TruncationError
from sphtrap.propagator import full_kernel, kernel_1d
from sphtrap.specfun import ModeIndex

GROUND = ModeIndex(1, 1, 0)


def _report(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line)
    if not ok:
        pytest.fail(line, pytrace=False)


def _coeffs_sweep(alpha, n_trunc, n_double, xi_grid, n_plot=4):
    """Worst norm deviation and worst plotted-value shift under N doubling."""
    geom = TrapGeometry(alpha)
    small = project_eigenstate_initial(geom, GROUND, n_trunc, tail_tol=5e-2)
    big = project_eigenstate_initial(geom, GROUND, n_double, tail_tol=5e-2)
    norm_dev = shift = 0.0
    for xi in xi_grid:
        t = 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
        b1 = instantaneous_coeffs(small, t).b
        b2 = instantaneous_coeffs(big, t).b
        norm_dev = max(norm_dev, abs(float(np.sum(np.abs(b1) ** 2)) - 1.0))
        shift = max(
            shift,
            float(np.max(np.abs(np.abs(b1[:n_plot]) ** 2 - np.abs(b2[:n_plot]) ** 2))),
        )
    return norm_dev, shift


def _grown_state(geom, mode):
    """Projection with the chirp-scaled basis growth the figure commands use."""
    n = max(60, mode.n + 40, mode.n + math.ceil(1.3 * abs(geom.alpha)))
    while True:
        try:
            return project_eigenstate_initial(geom, mode, min(n, 520), tail_tol=2e-5)
        except TruncationError:
            if n >= 520:
                raise
            n += 60


def test_acceptance_01_zero_table():
    """Monopole zeros exactly n*pi; interlacing to l=50, n=100; < 5 s."""
    results = check_zero_table(50, 100)
    by_name = {r.name: r for r in results}
    ok = all(r.passed for r in results)
    _report(
        "claim 1 (zero table)", ok,
        f"monopole dev {by_name['zero_table_monopole'].measured:.1e} "
        f"(<= 1e-12), interlacing "
        f"{'holds' if by_name['zero_table_interlacing'].passed else 'BROKEN'}, "
        f"built in {by_name['zero_table_build_time'].measured:.2f}s (< 5s)",
    )


def test_acceptance_02_orthogonality():
    """300 random radial-mode pairs orthonormal to 1e-10."""
    result = check_orthogonality(300)
    _report(
        "claim 2 (orthogonality)", result.passed,
        f"worst of 300 triples {result.measured:.2e} (<= 1e-10)",
    )


def test_acceptance_03_stated_truncations():
    """Ten terms for the occupation figures, fifteen for the energy figure:
    unit norm within 1e-3 and N-doubling shifts below 1e-3, verbatim."""
    failures = []
    notes = []

    # Occupation-figure scenarios: N = 10, plotted wall range [1, 0.5].
    xi_grid = np.linspace(1.0, 0.5, 11)
    for alpha in (-2.0, -4.0, -6.0, -10.0):
        norm_dev, shift = _coeffs_sweep(alpha, 10, 20, xi_grid)
        notes.append(f"a={alpha:g}: norm {norm_dev:.1e}, doubling {shift:.1e}")
        if norm_dev > 1e-3:
            failures.append(
                f"ten-term norm deficit {norm_dev:.2e} > 1e-3 at alpha={alpha:g}"
            )
        if shift > 1e-3:
            failures.append(
                f"ten-term doubling shift {shift:.2e} > 1e-3 at alpha={alpha:g}"
            )

    # Energy-figure scenarios: N = 15, plotted wall range [1, 0.3]; the
    # plotted value is the energy ratio.
    xi_grid = np.linspace(1.0, 0.3, 15)
    for alpha in (-2.0, -4.0, -6.0):
        geom = TrapGeometry(alpha)
        small = project_eigenstate_initial(geom, GROUND, 15, tail_tol=5e-2)
        big = project_eigenstate_initial(geom, GROUND, 30, tail_tol=5e-2)
        norm_dev = shift = 0.0
        for xi in xi_grid:
            t = 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
            b = instantaneous_coeffs(small, t).b
            norm_dev = max(norm_dev, abs(float(np.sum(np.abs(b) ** 2)) - 1.0))
            shift = max(
                shift,
                abs(energy_expectation(small, t)[1] - energy_expectation(big, t)[1]),
            )
        notes.append(f"a={alpha:g}: norm {norm_dev:.1e}, ratio doubling {shift:.1e}")
        if norm_dev > 1e-3:
            failures.append(
                f"fifteen-term norm deficit {norm_dev:.2e} > 1e-3 at alpha={alpha:g}"
            )
        if shift > 1e-3:
            failures.append(
                f"ratio doubling shift {shift:.2e} > 1e-3 at alpha={alpha:g}"
            )

    _report(
        "claim 3 (stated truncations)", not failures,
        "; ".join(failures or notes),
    )


def test_acceptance_04_identity_and_norm_at_1e8():
    """b(0) = delta and unit norm to 1e-8 at N = 40 over |alpha| <= 10."""
    worst_id = worst_norm = 0.0
    for alpha in (-10.0, -4.0, 4.0, 10.0):
        geom = TrapGeometry(alpha)
        state = project_eigenstate_initial(geom, GROUND, 40, tail_tol=5e-2)
        b0 = instantaneous_coeffs(state, 0.0).b
        delta = np.zeros(40)
        delta[0] = 1.0
        worst_id = max(worst_id, float(np.max(np.abs(b0 - delta))))
        xis = np.linspace(0.3, 1.0, 8) if alpha < 0 else np.linspace(1.0, 3.0, 9)
        for xi in xis:
            t = 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
            b = instantaneous_coeffs(state, t).b
            worst_norm = max(worst_norm, abs(float(np.sum(np.abs(b) ** 2)) - 1.0))
    _report(
        "claim 4 (identity/unitarity at 1e-8)",
        worst_id <= 1e-8 and worst_norm <= 1e-8,
        f"|b(0)-delta| = {worst_id:.2e}, |sum|b|^2 - 1| = {worst_norm:.2e} "
        f"(both claimed <= 1e-8 at N=40; the collapse residue falls like "
        f"N^-3 and is 1.1e-4 here)",
    )


def test_acceptance_05_pde_residual_order():
    """Exact modes satisfy the moving-wall wave equation at second order."""
    result = check_pde_suite()
    _report(
        "claim 5 (residual order)", result.passed,
        f"max |order - 2| = {result.measured:.2e} over 6 modes x 3 rates",
    )


def test_acceptance_06_propagator_equivalence():
    """Verbatim prefactor (x x'/4pi) K|_{l=0} against the 1D kernel, plus
    mode-propagation fidelity."""
    geom = TrapGeometry(0.5)
    t, tp = 0.4, 0.1
    wall, wall_p = geom.wall_radius(t), geom.wall_radius(tp)
    dev_claimed = dev_corrected = 0.0
    ratios = []
    for fx in np.linspace(0.2, 0.8, 3):
        for fxp in np.linspace(0.2, 0.8, 3):
            x, xp = fx * wall, fxp * wall_p
            one_d = kernel_1d(geom, x, t, xp, tp, 200)
            channel = full_kernel(geom, x, 0.3, 0.9, t, xp, 1.1, 0.2, tp, 0, 200)
            claimed = x * xp / (4.0 * math.pi) * channel
            corrected = 4.0 * math.pi * x * xp * channel
            dev_claimed = max(dev_claimed, abs(one_d - claimed))
            dev_corrected = max(dev_corrected, abs(one_d - corrected))
            ratios.append(one_d / claimed)
    spread = float(np.max(np.abs(np.asarray(ratios) - 16.0 * math.pi**2)))
    fidelity, _ = check_mode_fidelity(40)
    _report(
        "claim 6 (propagator equivalence)",
        dev_claimed <= 1e-10 and fidelity.passed,
        f"claimed prefactor misses by {dev_claimed:.2e}: the quoted "
        f"(x x'/4pi) is a constant 16 pi^2 too small (measured ratio "
        f"16 pi^2 within {spread:.1e}); with prefactor 4 pi x x' the "
        f"kernels agree to {dev_corrected:.1e} <= 1e-10; fidelity "
        f"1-|overlap| = {fidelity.measured:.1e} <= 1e-6",
    )


def test_acceptance_07_figure_orderings():
    """Qualitative claims on the emitted figure data, asserted verbatim."""
    failures = []
    notes = []

    # Mixing at xi = 0.5 strictly increases with the contraction rate
    # (ten-term data, the loosened tail the fast cases need).
    mixing = []
    for alpha in (-2.0, -4.0, -6.0, -10.0):
        geom = TrapGeometry(alpha)
        state = project_eigenstate_initial(geom, GROUND, 10, tail_tol=2e-3)
        b = instantaneous_coeffs(state, geom.time_at_xi(0.5)).b
        mixing.append(1.0 - abs(b[0]) ** 2)
    notes.append("mixing " + " < ".join(f"{m:.3f}" for m in mixing))
    if not all(a < b for a, b in zip(mixing, mixing[1:])):
        failures.append(f"mixing not increasing: {mixing}")

    # Energy ratio >= 1 and nondecreasing as the wall comes in.
    for alpha in (-2.0, -4.0, -6.0):
        geom = TrapGeometry(alpha)
        state = project_eigenstate_initial(geom, GROUND, 15, tail_tol=1e-3)
        xi_grid = np.linspace(1.0, 0.3, 15)
        ratios = np.asarray(
            [
                energy_expectation(
                    state, 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
                )[1]
                for xi in xi_grid
            ]
        )
        if np.min(ratios) < 1.0:
            failures.append(f"ratio dips below 1 at alpha={alpha:g}")
        drop = float(np.max(ratios[:-1] - ratios[1:]))
        if drop > 0.0:
            peak = xi_grid[int(np.argmax(ratios))]
            failures.append(
                f"ratio is not monotone at alpha={alpha:g}: it peaks at "
                f"xi={peak:.2f} then falls by {drop:.3f} as the mixing "
                f"freezes toward the sudden plateau"
            )

    # Adiabatic and sudden density overlaps for the expanding well.
    mode = ModeIndex(0, 5, 0)
    frame = observation_frame(TrapGeometry(0.0), mode, 2.0)
    eta = np.linspace(0.0, frame.eta0, 501)

    def eigen_density(geom, t):
        r = eta * frame.wavelength
        rho = np.zeros_like(eta)
        inside = r <= geom.wall_radius(t)
        radial = np.asarray(instantaneous_mode(geom, mode, r[inside], t))
        rho[inside] = frame.wavelength**3 * eta[inside] ** 2 * radial**2
        return rho

    slow = TrapGeometry(0.01 * frame.alpha_scale)
    t_slow = 1.0 / slow.wall_speed
    adiabatic = density_overlap(
        eta,
        density_vs_radius(_grown_state(slow, mode), frame, eta, t_slow, clip=True),
        eigen_density(slow, t_slow),
    )
    notes.append(f"adiabatic overlap {adiabatic:.4f}")
    if not adiabatic > 0.99:
        failures.append(f"adiabatic overlap {adiabatic:.4f} <= 0.99")

    fast = TrapGeometry(20.0 * frame.alpha_scale)
    t_fast = 1.0 / fast.wall_speed
    sudden = density_overlap(
        eta,
        density_vs_radius(_grown_state(fast, mode), frame, eta, t_fast, clip=True),
        eigen_density(TrapGeometry(0.0), 0.0),
    )
    notes.append(f"sudden overlap {sudden:.4f}")
    if not sudden > 0.95:
        failures.append(f"sudden overlap {sudden:.4f} <= 0.95")

    # Fixed-point density: causality zeros and first-burst ordering.
    for radial_n in (15, 100):
        mode_t = ModeIndex(0, radial_n, 0)
        frame_t = observation_frame(TrapGeometry(0.0), mode_t, 2.0)
        T_grid = np.linspace(0.0, 1.5 * frame_t.flight_far, 601)
        peaks = []
        for mult in (0.9, 1.0, 2.0):
            geom = TrapGeometry(mult * frame_t.alpha_scale)
            rho = density_vs_time(_grown_state(geom, mode_t), frame_t, T_grid)
            before = T_grid < frame_t.frequency / geom.wall_speed
            if np.any(rho[before] != 0.0):
                failures.append(
                    f"density nonzero before the wall arrives "
                    f"(n={radial_n}, mult={mult:g})"
                )
            # Faint onset ripples precede the main burst; count only
            # maxima within a quarter of the column peak.
            floor = 0.25 * float(np.max(rho))
            idx = [
                i
                for i in range(1, len(rho) - 1)
                if rho[i] >= floor and rho[i] >= rho[i - 1] and rho[i] > rho[i + 1]
            ]
            peaks.append(float(rho[idx[0]]) if idx else math.inf)
        notes.append(
            f"n={radial_n} first peaks " + " > ".join(f"{p:.3f}" for p in peaks)
        )
        if not all(a > b for a, b in zip(peaks, peaks[1:])):
            failures.append(f"first-peak heights not decreasing at n={radial_n}")

    _report(
        "claim 7 (figure orderings)", not failures,
        "; ".join(failures + notes if failures else notes),
    )


def test_acceptance_08_oracle_agreement_and_budget():
    """Goldens match the million-point midpoint oracle; selfcheck < 5 min."""
    golden_path = importlib.resources.files("sphtrap") / "data" / "overlap_golden.csv"
    golden_results = check_overlap_goldens(golden_path)
    oracle = next(r for r in golden_results if r.name == "overlap_golden_oracle")
    results, elapsed = run_selfcheck()
    ok = oracle.passed and all(r.passed for r in results) and elapsed < 300.0
    _report(
        "claim 8 (oracle agreement, budget)", ok,
        f"golden-vs-oracle worst {oracle.measured:.1e} (<= 1e-8); "
        f"selfcheck {sum(r.passed for r in results)}/{len(results)} "
        f"in {elapsed:.1f}s (< 300s)",
    )
