"""Tests for the chirped Bessel overlap quadrature.

Golden values in data/overlap_golden.csv were frozen from the midpoint
oracle at 10^6 and 2*10^6 points (agreement < 1e-10) before the Gauss
route existed; the suite holds the fast route to those numbers.
"""

import importlib.resources
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.special import spherical_jn

from sphtrap.errors import DomainError, QuadratureError
from sphtrap.oscint import (
    OverlapRequest,
    QuadratureSettings,
    composite_gauss,
    mode_overlap_integral,
    overlap_block,
    overlap_matrix,
    read_overlap_golden,
    riemann_oracle,
    write_overlap_golden,
)

GOLDEN_PATH = importlib.resources.files("sphtrap") / "data" / "overlap_golden.csv"
DEFAULTS = QuadratureSettings()


def _integrand(table, l, n_row, n_col, beta):
    x_r = table.zero(l, n_row)
    x_c = table.zero(l, n_col)

    def f(s):
        return (
            s * s * np.exp(-1j * beta * s * s)
            * spherical_jn(l, x_r * s) * spherical_jn(l, x_c * s)
        )

    return f


# ---------------------------------------------------------------------------
# quadrature building blocks
# ---------------------------------------------------------------------------


def test_composite_gauss_polynomial_exactness():
    # 16-point Gauss is exact through degree 31 per panel
    assert_allclose(composite_gauss(1, 16, lambda s: s**5), 1.0 / 6.0, rtol=1e-15)
    assert_allclose(
        composite_gauss(3, 4, lambda s: 7 * s**7 - s**2), 7.0 / 8.0 - 1.0 / 3.0,
        rtol=1e-14,
    )


def test_composite_gauss_complex():
    val = composite_gauss(64, 16, lambda s: np.exp(1j * s))
    assert_allclose(val, complex(math.sin(1.0), 1.0 - math.cos(1.0)), rtol=1e-14)


def test_riemann_oracle_exact_for_linear():
    # midpoint rule integrates linear functions exactly
    assert_allclose(riemann_oracle(lambda s: 3.0 * s - 1.0, 7), 0.5, rtol=1e-15)


def test_quadrature_input_validation():
    with pytest.raises(DomainError):
        composite_gauss(0, 16, lambda s: s)
    with pytest.raises(DomainError):
        riemann_oracle(lambda s: s, 0)
    with pytest.raises(DomainError):
        QuadratureSettings(points_per_panel=1)
    with pytest.raises(DomainError):
        QuadratureSettings(refinement_tolerance=0.0)
    with pytest.raises(DomainError):
        OverlapRequest(-1, 1, 1, 0.0)
    with pytest.raises(DomainError):
        OverlapRequest(0, 0, 1, 0.0)
    with pytest.raises(DomainError):
        OverlapRequest(0, 1, 1, math.inf)


# ---------------------------------------------------------------------------
# golden values
# ---------------------------------------------------------------------------


def test_goldens_match_frozen_oracle_values(medium_table, small_table):
    entries = read_overlap_golden(GOLDEN_PATH)
    assert len(entries) >= 7
    for req, frozen in entries:
        table = small_table if req.l > 2 else medium_table
        val = mode_overlap_integral(req, DEFAULTS, table)
        assert abs(val - frozen) < 1e-12, req


def test_golden_roundtrip(tmp_path, small_table):
    entries = [
        (OverlapRequest(2, 1, 3, -4.25), complex(0.125, -3e-5)),
        (OverlapRequest(0, 2, 2, 0.0), complex(0.25, 0.0)),
    ]
    path = tmp_path / "golden.csv"
    write_overlap_golden(path, entries)
    back = read_overlap_golden(path)
    assert back == entries


def test_golden_reader_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3\n")
    with pytest.raises(DomainError):
        read_overlap_golden(path)


def test_zero_chirp_closed_form(medium_table):
    # at beta = 0 plain orthogonality gives delta * j_{l+1}^2 / 2;
    # the (0,1,1) case is 1/(2 pi^2)
    val = mode_overlap_integral(OverlapRequest(0, 1, 1, 0.0), DEFAULTS, medium_table)
    assert_allclose(val.real, 1.0 / (2.0 * math.pi**2), rtol=1e-13)
    assert abs(val.imag) < 1e-15
    for l, n_row, n_col in [(0, 1, 2), (1, 1, 3), (2, 2, 5)]:
        val = mode_overlap_integral(
            OverlapRequest(l, n_row, n_col, 0.0), DEFAULTS, medium_table
        )
        assert abs(val) < 1e-14


def test_diagonal_zero_chirp_norm(medium_table):
    for l, n in [(0, 4), (1, 2), (2, 7)]:
        val = mode_overlap_integral(OverlapRequest(l, n, n, 0.0), DEFAULTS, medium_table)
        expected = medium_table.j_next_at_zero(l, n) ** 2 / 2.0
        assert_allclose(val.real, expected, rtol=1e-12)


def test_gauss_agrees_with_midpoint_oracle(medium_table):
    for l, n_row, n_col, beta in [(0, 2, 5, 3.0), (1, 1, 4, -7.5), (2, 3, 3, 11.0)]:
        gauss = mode_overlap_integral(
            OverlapRequest(l, n_row, n_col, beta), DEFAULTS, medium_table
        )
        midpoint = riemann_oracle(
            _integrand(medium_table, l, n_row, n_col, beta), 400_000
        )
        assert abs(gauss - midpoint) < 1e-9


# ---------------------------------------------------------------------------
# structural properties
# ---------------------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(
    l=st.integers(min_value=0, max_value=2),
    n_row=st.integers(min_value=1, max_value=12),
    n_col=st.integers(min_value=1, max_value=12),
    beta=st.floats(min_value=-30.0, max_value=30.0),
)
def test_conjugation_and_symmetry(medium_table, l, n_row, n_col, beta):
    forward = mode_overlap_integral(
        OverlapRequest(l, n_row, n_col, beta), DEFAULTS, medium_table
    )
    reversed_chirp = mode_overlap_integral(
        OverlapRequest(l, n_row, n_col, -beta), DEFAULTS, medium_table
    )
    swapped = mode_overlap_integral(
        OverlapRequest(l, n_col, n_row, beta), DEFAULTS, medium_table
    )
    assert abs(reversed_chirp - forward.conjugate()) < 1e-12
    assert abs(swapped - forward) < 1e-12
    # |integrand| <= 1 on [0,1] pointwise, so |I| <= 1 with lots of slack
    assert abs(forward) <= 1.0


def test_block_matches_elementwise(medium_table):
    rows = [1, 3, 4]
    cols = [2, 4]
    block = overlap_block(1, rows, cols, -3.5, DEFAULTS, medium_table)
    assert block.shape == (3, 2)
    for i, n_row in enumerate(rows):
        for j, n_col in enumerate(cols):
            single = mode_overlap_integral(
                OverlapRequest(1, n_row, n_col, -3.5), DEFAULTS, medium_table
            )
            assert abs(block[i, j] - single) < 1e-13


def test_matrix_symmetric(medium_table):
    mat = overlap_matrix(0, 8, 6.0, DEFAULTS, medium_table)
    assert mat.shape == (8, 8)
    assert np.abs(mat - mat.T).max() < 1e-15


def test_completeness_of_projection_weights(medium_table):
    # sum over a long column of 4 I(l,n,k,beta)^2 / (j_{l+1}(x_n) j_{l+1}(x_k))^2
    # approaches 1: expansion of a unit-norm chirped mode
    l, n, beta = 1, 1, 2.0
    cols = np.arange(1, 61)
    block = overlap_block(l, [n], cols, beta, DEFAULTS, medium_table)[0]
    j_n = medium_table.j_next_at_zero(l, n)
    j_cols = medium_table.j_next_row(l, 60)
    weights = np.abs(2.0 * block / (abs(j_n) * np.abs(j_cols))) ** 2
    assert abs(weights.sum() - 1.0) < 1e-5


def test_unconverged_quadrature_raises(medium_table):
    strict = QuadratureSettings(
        points_per_panel=2, min_panels=1, refinement_tolerance=1e-15, max_refinements=1
    )
    with pytest.raises(QuadratureError):
        overlap_block(0, [9, 10], [9, 10], 50.0, strict, medium_table)


def test_empty_block_rejected(medium_table):
    with pytest.raises(DomainError):
        overlap_block(0, [], [1], 0.0, DEFAULTS, medium_table)
