import numpy as np
import pytest

from sphtrap.specfun import build_zero_table


@pytest.fixture(scope="session")
def small_table():
    """Zero table covering l <= 6, n <= 12: enough for most module tests."""
    return build_zero_table(6, 12)


@pytest.fixture(scope="session")
def medium_table():
    """Zero table for truncation studies up to N = 60."""
    return build_zero_table(2, 60)


@pytest.fixture(scope="session")
def gauss_rule():
    """Composite 20-point Gauss rule on [0, 1], independent of the library.

    Returns (nodes, weights) with 200 panels; exact to machine precision
    for the smooth oscillatory integrands used as oracles here.
    """

    def make(panels: int = 200, order: int = 20):
        x, w = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(0.0, 1.0, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights

    return make
