import math

import numpy as np
import pytest


def bisect_min_root(g, lo, hi, grid=20000):
    """Minimal root of ``g`` on ``[lo, hi]`` by dense scan plus bisection.

    Independent of the package's iterate-then-bisect engine: the first grid
    cell where ``g`` turns non-negative is refined by plain bisection.
    Returns None when ``g`` stays negative on the whole grid.
    """
    xs = np.linspace(lo, hi, grid + 1)
    prev = xs[0]
    if g(prev) >= 0:
        return prev
    for x in xs[1:]:
        if g(x) >= 0:
            a, b = prev, x
            for _ in range(200):
                m = 0.5 * (a + b)
                if m <= a or m >= b:
                    break
                if g(m) >= 0:
                    b = m
                else:
                    a = m
            return b
        prev = x
    return None


def linear_psi(l0, eta, v):
    return eta + l0 * v * v / (1.0 - l0 * v)


def quadratic_min_root(l0, eta):
    """Smaller root of 2 l0 v^2 - (1 + l0 eta) v + eta by the textbook formula."""
    lam = l0 * eta
    disc = lam * lam - 6 * lam + 1
    if disc < 0:
        return None
    return ((1 + lam) - math.sqrt(disc)) / (4 * l0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
