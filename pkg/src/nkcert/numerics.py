"""Dense linear algebra in the infinity norm and adaptive Simpson quadrature.

Vectors and matrices are plain float64 numpy arrays; :func:`as_vector` and
:func:`as_matrix` validate shape and finiteness at the boundaries where user
input enters the package.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from .errors import NonConvergedQuadrature, SingularMatrix

PIVOT_RTOL = 1e-14
MAX_QUAD_DEPTH = 60
MIN_QUAD_DEPTH = 4
QUAD_ABS_FLOOR = 1e-15


def as_vector(x) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def as_matrix(a) -> np.ndarray:
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def norm_inf(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))


def operator_norm_inf(a) -> float:
    """Induced infinity norm: the largest absolute row sum."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


class LUFactor:
    """LU factorization with partial pivoting, ``P A = L U``.

    The factorization is computed once and can then be applied to many
    right-hand sides, which is what the modulus estimator needs when it
    solves ``F'(x0) X = F'(x) - F'(x0)`` column by column.

    Raises
    ------
    SingularMatrix
        If a pivot magnitude drops below ``1e-14 * max|A|``.
    """

    def __init__(self, a):
        a = as_matrix(a)
        n = a.shape[0]
        lu = a.copy()
        perm = np.arange(n)
        threshold = PIVOT_RTOL * float(np.max(np.abs(a)))
        for k in range(n):
            p = k + int(np.argmax(np.abs(lu[k:, k])))
            pivot = lu[p, k]
            if pivot == 0.0 or abs(pivot) < threshold:
                raise SingularMatrix(
                    f"pivot {abs(pivot):.3e} in column {k} is below {threshold:.3e}"
                )
            if p != k:
                lu[[k, p]] = lu[[p, k]]
                perm[[k, p]] = perm[[p, k]]
            lu[k + 1:, k] /= pivot
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
        self.lu = lu
        self.perm = perm

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    def solve(self, b) -> np.ndarray:
        """Solve ``A x = b``; ``b`` may be a vector or an (n, m) block."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise ValueError(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        y = b[self.perm].copy()
        lu = self.lu
        for i in range(1, self.n):
            y[i] -= lu[i, :i] @ y[:i]
        for i in range(self.n - 1, -1, -1):
            y[i] = (y[i] - lu[i, i + 1:] @ y[i + 1:]) / lu[i, i]
        return y


def solve_linear(a, b) -> np.ndarray:
    """Return ``x`` with ``A x = b`` via LU with partial pivoting."""
    return LUFactor(a).solve(as_vector(b))


def integrate(f: Callable[[float], float], b: float, rel_tol: float = 1e-12) -> float:
    """Adaptive Simpson estimate of the integral of ``f`` over ``[0, b]``.

    The acceptance test on each panel uses one absolute tolerance,
    ``max(rel_tol * |I|, 1e-15 * b * max|f|)`` with ``I`` a coarse estimate
    of the whole integral and ``max|f|`` taken on the coarse grid, rather
    than halving it at every level. Halving would push the
    depth past the recursion budget for moduli like ``sqrt(r)`` whose
    derivative blows up at 0.
    """
    if b < 0:
        raise ValueError("upper limit must be non-negative")
    if b == 0:
        return 0.0

    xs = np.linspace(0.0, b, 33)
    ys = [float(f(x)) for x in xs]
    h = b / 32
    coarse = h / 3 * (ys[0] + ys[-1] + 4 * sum(ys[1:-1:2]) + 2 * sum(ys[2:-1:2]))
    tol = max(rel_tol * abs(coarse), QUAD_ABS_FLOOR * b * max(abs(y) for y in ys))

    def simpson(fa, fm, fb, width):
        return width / 6 * (fa + 4 * fm + fb)

    def panel(a, c, fa, fm, fc, whole, depth):
        m = 0.5 * (a + c)
        lm, rm = 0.5 * (a + m), 0.5 * (m + c)
        flm, frm = float(f(lm)), float(f(rm))
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fc, c - m)
        delta = left + right - whole
        collapsed = not a < lm < m < rm < c
        if abs(delta) <= 15 * tol and (depth >= MIN_QUAD_DEPTH or collapsed):
            return left + right + delta / 15
        if depth >= MAX_QUAD_DEPTH or collapsed:
            raise NonConvergedQuadrature(
                f"no convergence on [{a:.6g}, {c:.6g}] after {depth} levels"
            )
        return (panel(a, m, fa, flm, fm, left, depth + 1)
                + panel(m, c, fm, frm, fc, right, depth + 1))

    fa, fm, fb = ys[0], float(f(0.5 * b)), ys[-1]
    return panel(0.0, b, fa, fm, fb, simpson(fa, fm, fb, b), 0)
