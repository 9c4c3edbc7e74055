"""Scalar majorant machinery for Newton's method under a centered modulus.

Given ``omega0``, ``eta`` and the domain radius ``R`` this module provides

* ``gamma(s) = 1 / (1 - omega0(s))``,
* the first-integral map ``psi(v) = eta + 2 gamma(v) int_0^v omega0``,
* the majorizing sequence ``v_{k+1} = psi(v_k)`` from ``v_0 = 0`` and its
  limit, the minimal fixed point ``v*`` of ``psi``,
* the two-history step bound ``Omega(t, s, r)``, its telescoping majorant
  ``Omega_bar`` and the sequence ``u_k`` driven by ``Omega``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass

from .errors import BeyondTabulatedRange, ModulusSaturated, SpecError
from .modulus import ContinuityModulus, LinearModulus

SATURATION_MARGIN = 1e-12
STEP_RTOL = 1e-14
FIXED_POINT_RTOL = 1e-12
DEFAULT_MAX_ITER = 100_000
# how often the monotone iteration tries to close a bracket by extrapolation
EXTRAPOLATE_EVERY = 8
# contraction ratio above which a tangential fixed point is searched for
SLOW_RATE = 0.9


class SequenceStatus(str, enum.Enum):
    CONVERGED = "Converged"
    EXCEEDED_RADIUS = "ExceededRadius"
    MODULUS_SATURATED = "ModulusSaturated"
    ITERATION_CAPPED = "IterationCapped"


@dataclass(frozen=True)
class MajorantModel:
    """The triple ``(omega0, eta, R)``."""

    modulus: ContinuityModulus
    eta: float
    radius: float

    def __post_init__(self):
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise SpecError(f"eta must be finite and >= 0, got {self.eta!r}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise SpecError(f"radius must be finite and > 0, got {self.radius!r}")
        if self.eta > self.radius:
            raise SpecError(f"eta={self.eta!r} exceeds the radius R={self.radius!r}")
        if self.modulus.max_radius < self.radius:
            raise SpecError(
                f"modulus is only tabulated up to {self.modulus.max_radius!r} < R={self.radius!r}")

    def with_eta(self, eta: float) -> MajorantModel:
        return MajorantModel(self.modulus, eta, self.radius)


@dataclass(frozen=True)
class MajorantSequenceResult:
    """Iterates of a monotone scalar recurrence and how the run ended.

    ``v_star`` is set only for ``Converged`` runs.
    """

    values: tuple
    status: SequenceStatus
    v_star: float | None
    iterations: int

    @property
    def converged(self) -> bool:
        return self.status is SequenceStatus.CONVERGED


def gamma(model: MajorantModel, s: float) -> float:
    w = model.modulus(s)
    if w >= 1.0 - SATURATION_MARGIN:
        raise ModulusSaturated(f"omega0({s:.6g}) = {w:.6g} >= 1")
    return 1.0 / (1.0 - w)


def psi(model: MajorantModel, v: float) -> float:
    m = model.modulus
    if isinstance(m, LinearModulus):
        lv = m.l0 * v
        if lv >= 1.0 - SATURATION_MARGIN:
            raise ModulusSaturated(f"omega0({v:.6g}) = {lv:.6g} >= 1")
        return model.eta + m.l0 * v * v / (1.0 - lv)
    return model.eta + 2.0 * gamma(model, v) * m.integral(v)


def argyros_map(model: MajorantModel, v: float) -> float:
    """``f(v) = gamma(v) (int_0^v omega0 + omega0(v) v + eta)``.

    Pointwise ``f >= psi``, strictly so on ``]0, R]`` when ``eta > 0`` and
    ``omega0`` is strictly increasing.
    """
    m = model.modulus
    return gamma(model, v) * (m.integral(v) + m(v) * v + model.eta)


def omega_bound(model: MajorantModel, t: float, s: float, r: float) -> float:
    """``Omega(t, s, r) = gamma(s) (int_r^{r+t} omega0 + omega0(r) t)``."""
    m = model.modulus
    return gamma(model, s) * (m.integral(r + t) - m.integral(r) + m(r) * t)


def omega_majorant(model: MajorantModel, t: float, s: float, r: float) -> float:
    """``Omega_bar(t, s, r) = 2 gamma(s) int_0^{r+t} omega0 - 2 gamma(r) int_0^r omega0``."""
    m = model.modulus
    return 2.0 * gamma(model, s) * m.integral(r + t) - 2.0 * gamma(model, r) * m.integral(r)


def _fixed_point_gap(func, v):
    """``v - func(v)``, or None where ``func`` is undefined."""
    try:
        return v - func(v)
    except (ModulusSaturated, BeyondTabulatedRange):
        return None


def _bisect_crossing(func, lo, hi):
    """Shrink ``[lo, hi]`` with ``lo - func(lo) < 0 <= hi - func(hi)`` to a point."""
    g_lo = _fixed_point_gap(func, lo)
    if g_lo is not None and g_lo >= 0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = _fixed_point_gap(func, mid)
        if g is None or g >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def _tolerance(v):
    return FIXED_POINT_RTOL * max(1.0, v)


def _close_bracket(func, lo, candidates, radius):
    """Find ``v*`` above the lower bound ``lo`` using trial upper ends.

    A trial point ``hi`` with ``hi - func(hi) >= 0`` bounds the minimal fixed
    point from above (``func(0) >= 0`` and continuity), so the crossing is
    located by bisection between ``lo`` and ``hi``.
    """
    for hi in candidates:
        if not lo < hi <= radius:
            continue
        g = _fixed_point_gap(func, hi)
        if g is not None and g >= 0:
            return _bisect_crossing(func, lo, hi)
    return None


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _touch_point(func, lo, hi):
    """Locate a tangential fixed point in ``[lo, hi]``.

    Near the critical case ``v - func(v)`` rises to a maximum close to zero
    instead of crossing it. Golden-section search finds that maximum; a
    non-negative maximum gives an ordinary bracket, and a maximum within the
    fixed-point tolerance below zero is accepted as the (double) fixed point.
    """
    def gap(v):
        g = _fixed_point_gap(func, v)
        return -math.inf if g is None else g

    a, b = lo, hi
    c, d = b - _INV_PHI * (b - a), a + _INV_PHI * (b - a)
    gc, gd = gap(c), gap(d)
    for _ in range(200):
        if b - a <= 4 * math.ulp(max(abs(a), abs(b))):
            break
        if gc >= 0 or gd >= 0:
            return _bisect_crossing(func, lo, c if gc >= 0 else d)
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - _INV_PHI * (b - a)
            gc = gap(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INV_PHI * (b - a)
            gd = gap(d)
    best, g_best = (c, gc) if gc >= gd else (d, gd)
    if -g_best <= _tolerance(best):
        return best
    return None


def iterate_to_fixed_point(func: Callable[[float], float], radius: float,
                           max_iter: int = DEFAULT_MAX_ITER) -> MajorantSequenceResult:
    """Monotone iteration ``v_{k+1} = func(v_k)`` from ``v_0 = 0``.

    ``func`` must be continuous and non-decreasing with ``func(0) >= 0``; the
    iterates then increase towards the minimal fixed point and each one is a
    lower bound for it. Termination:

    * a step below ``1e-14 * max(1, v)``: the last iterate is polished by
      bisection on ``v - func(v)`` inside ``[v_K, v_K + 10 dv]``;
    * every few steps, a geometric extrapolation of the remaining distance
      proposes upper ends; the first that brackets the crossing ends the run;
    * when contraction is slow (the critical case, where ``psi`` touches the
      diagonal), a search for the tangency point at ``k = 16, 32, 64, ...``;
    * an iterate above ``radius``, a saturated modulus, or ``max_iter``.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    values = [0.0]
    try:
        first = func(0.0)
    except (ModulusSaturated, BeyondTabulatedRange):
        return MajorantSequenceResult(tuple(values), SequenceStatus.MODULUS_SATURATED, None, 0)
    if first == 0.0:
        return MajorantSequenceResult(tuple(values), SequenceStatus.CONVERGED, 0.0, 0)
    if first > radius:
        values.append(first)
        return MajorantSequenceResult(tuple(values), SequenceStatus.EXCEEDED_RADIUS, None, 1)
    values.append(first)

    v = first
    for k in range(2, max_iter + 1):
        try:
            nxt = func(v)
        except (ModulusSaturated, BeyondTabulatedRange):
            return MajorantSequenceResult(tuple(values), SequenceStatus.MODULUS_SATURATED, None, k - 1)
        if nxt > radius:
            values.append(nxt)
            return MajorantSequenceResult(tuple(values), SequenceStatus.EXCEEDED_RADIUS, None, k)
        nxt = max(nxt, v)
        values.append(nxt)
        step = nxt - v
        if step <= STEP_RTOL * max(1.0, v):
            top = min(radius, nxt + 10.0 * (nxt - values[-2] if len(values) > 2 else 0.0) + 1e-12)
            g_top = _fixed_point_gap(func, top)
            v_star = _bisect_crossing(func, nxt, top) if g_top is not None and g_top > 0 else nxt
            return MajorantSequenceResult(tuple(values), SequenceStatus.CONVERGED, v_star, k)
        if k % EXTRAPOLATE_EVERY == 0:
            prev_step = v - values[-3]
            rate = step / prev_step if prev_step > 0 else 0.0
            if 0 < rate < 1:
                remaining = step * rate / (1.0 - rate)
                trials = [nxt + m * remaining for m in (1.5, 1.1, 3.0, 1.01)]
                v_star = _close_bracket(func, nxt, trials, radius)
                if v_star is None and rate > SLOW_RATE and k & (k - 1) == 0:
                    v_star = _touch_point(func, nxt, min(radius, nxt + 4.0 * remaining))
                if v_star is not None:
                    return MajorantSequenceResult(
                        tuple(values), SequenceStatus.CONVERGED, v_star, k)
        v = nxt
    return MajorantSequenceResult(tuple(values), SequenceStatus.ITERATION_CAPPED, None, max_iter)


def majorant_sequence(model: MajorantModel, max_iter: int = DEFAULT_MAX_ITER) -> MajorantSequenceResult:
    """Majorizing sequence ``v_0 = 0, v_{k+1} = psi(v_k)`` and its limit."""
    return iterate_to_fixed_point(lambda v: psi(model, v), model.radius, max_iter)


@dataclass(frozen=True)
class FixedPoint:
    """Minimal fixed point of ``psi`` accepted as a convergence radius.

    ``degenerate`` marks ``v* == eta``, which the strict requirement
    ``eta < v*`` excludes but which is exact for a modulus vanishing on
    ``[0, eta]`` (and for ``eta = 0``).
    """

    value: float
    degenerate: bool
    sequence: MajorantSequenceResult


def accept_fixed_point(model: MajorantModel, seq: MajorantSequenceResult) -> FixedPoint | None:
    """Apply the ``eta < v* <= R`` requirement to a finished sequence run."""
    if not seq.converged:
        return None
    v_star = seq.v_star
    if model.eta < v_star <= model.radius:
        return FixedPoint(v_star, False, seq)
    if v_star == model.eta:
        return FixedPoint(v_star, True, seq)
    return None


def find_fixed_point(model: MajorantModel, max_iter: int = DEFAULT_MAX_ITER) -> FixedPoint | None:
    return accept_fixed_point(model, majorant_sequence(model, max_iter))


def minimal_fixed_point(model: MajorantModel, max_iter: int = DEFAULT_MAX_ITER) -> float | None:
    fp = find_fixed_point(model, max_iter)
    return None if fp is None else fp.value


def majorant_values(model: MajorantModel, count: int, v_star: float | None = None) -> list[float]:
    """The first ``count + 1`` terms ``v_0 .. v_count`` of the sequence.

    Terms are capped at ``v_star`` when given, which only matters in the
    last few ulps where the iteration may round past a polished limit.
    """
    values = [0.0]
    v = 0.0
    for _ in range(count):
        v = psi(model, v)
        if v_star is not None:
            v = min(v, v_star)
        values.append(v)
    return values


def rheinboldt_sequence(model: MajorantModel, max_iter: int = DEFAULT_MAX_ITER) -> MajorantSequenceResult:
    """``u_0 = 0, u_1 = eta, u_{k+1} = u_k + Omega(u_k - u_{k-1}, u_k, u_{k-1})``.

    ``v_star`` of the result holds the limit when the increments die out.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    u = [0.0, model.eta]
    if model.eta == 0:
        return MajorantSequenceResult((0.0,), SequenceStatus.CONVERGED, 0.0, 0)
    for k in range(2, max_iter + 1):
        prev, cur = u[-2], u[-1]
        try:
            nxt = cur + omega_bound(model, cur - prev, cur, prev)
        except (ModulusSaturated, BeyondTabulatedRange):
            return MajorantSequenceResult(tuple(u), SequenceStatus.MODULUS_SATURATED, None, k - 1)
        if nxt > model.radius:
            u.append(nxt)
            return MajorantSequenceResult(tuple(u), SequenceStatus.EXCEEDED_RADIUS, None, k)
        u.append(nxt)
        if nxt - cur <= STEP_RTOL * max(1.0, cur):
            return MajorantSequenceResult(tuple(u), SequenceStatus.CONVERGED, nxt, k)
    return MajorantSequenceResult(tuple(u), SequenceStatus.ITERATION_CAPPED, None, max_iter)
