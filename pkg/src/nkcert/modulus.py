"""Centered continuity moduli ``omega0(r)``.

A modulus bounds ``||F'(x0)^{-1} (F'(x) - F'(x0))||`` for ``||x - x0|| <= r``.
Every variant is continuous, non-decreasing and vanishes at 0. Integrals
``int_0^v omega0`` are exact for every variant; numeric quadrature is only
used by the tests as an independent cross-check.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BeyondTabulatedRange, OutOfDomain, SpecError
from .numerics import LUFactor, as_vector, operator_norm_inf


class ContinuityModulus:
    """Common interface of the modulus variants."""

    #: largest radius at which the modulus may be evaluated
    max_radius: float = math.inf

    def __call__(self, r: float) -> float:
        _check_radius(r)
        return self._eval(r)

    def integral(self, v: float) -> float:
        """``int_0^v omega0(l) dl``."""
        _check_radius(v)
        return self._integral(v)

    @property
    def strictly_increasing(self) -> bool:
        raise NotImplementedError

    @property
    def is_zero(self) -> bool:
        return False

    def to_spec(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def _eval(self, r):
        raise NotImplementedError

    def _integral(self, v):
        raise NotImplementedError


def _check_radius(r):
    if not r >= 0:
        raise ValueError(f"radius must be non-negative, got {r!r}")


@dataclass(frozen=True)
class LinearModulus(ContinuityModulus):
    """``omega0(r) = l0 * r``; ``l0`` is the center-Lipschitz constant."""

    l0: float

    def __post_init__(self):
        if not (self.l0 >= 0 and math.isfinite(self.l0)):
            raise SpecError(f"l0 must be finite and >= 0, got {self.l0!r}")

    def _eval(self, r):
        return self.l0 * r

    def _integral(self, v):
        return 0.5 * self.l0 * v * v

    @property
    def strictly_increasing(self):
        return self.l0 > 0

    @property
    def is_zero(self):
        return self.l0 == 0

    def to_spec(self):
        return {"kind": "linear", "l0": self.l0}

    def describe(self):
        return f"linear(l0={self.l0:.6g})"


@dataclass(frozen=True)
class PowerModulus(ContinuityModulus):
    """Hoelder-type modulus ``omega0(r) = c * r**p`` with ``0 < p <= 1``."""

    c: float
    p: float

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise SpecError(f"c must be finite and >= 0, got {self.c!r}")
        if not 0 < self.p <= 1:
            raise SpecError(f"exponent p must lie in ]0, 1], got {self.p!r}")

    def _eval(self, r):
        return self.c * r ** self.p

    def _integral(self, v):
        return self.c * v ** (self.p + 1) / (self.p + 1)

    @property
    def strictly_increasing(self):
        return self.c > 0

    @property
    def is_zero(self):
        return self.c == 0

    def to_spec(self):
        return {"kind": "power", "c": self.c, "p": self.p}

    def describe(self):
        return f"power(c={self.c:.6g}, p={self.p:.6g})"


@dataclass(frozen=True)
class ExponentialModulus(ContinuityModulus):
    """``omega0(r) = c * (exp(a r) - 1)``.

    Exact modulus of scalar maps with ``F' = exp``, e.g. ``exp(x) - 1.1``
    where ``F'(x0)^{-1}(F'(x) - F'(x0)) = exp(x - x0) - 1``.
    """

    c: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise SpecError(f"c must be finite and >= 0, got {self.c!r}")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise SpecError(f"rate a must be finite and > 0, got {self.a!r}")

    def _eval(self, r):
        return self.c * math.expm1(self.a * r)

    def _integral(self, v):
        return self.c * (math.expm1(self.a * v) / self.a - v)

    @property
    def strictly_increasing(self):
        return self.c > 0

    @property
    def is_zero(self):
        return self.c == 0

    def to_spec(self):
        return {"kind": "exp", "c": self.c, "a": self.a}

    def describe(self):
        return f"exp(c={self.c:.6g}, a={self.a:.6g})"


@dataclass(frozen=True)
class PiecewiseLinearModulus(ContinuityModulus):
    """Tabulated modulus, linearly interpolated between knots ``(r_i, w_i)``.

    Knots must start at ``(0, 0)`` with strictly increasing radii and
    non-decreasing values. ``lower_estimate`` marks tables produced by
    sampling, which under-estimate the true modulus.
    """

    knots: tuple
    lower_estimate: bool = False
    _radii: tuple = field(init=False, repr=False, compare=False)
    _cumulative: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = tuple((float(r), float(w)) for r, w in self.knots)
        if len(knots) < 2:
            raise SpecError("a tabulated modulus needs at least two knots")
        if knots[0] != (0.0, 0.0):
            raise SpecError(f"first knot must be (0, 0), got {knots[0]}")
        for (r0, w0), (r1, w1) in zip(knots, knots[1:]):
            if not r1 > r0:
                raise SpecError("knot radii must be strictly increasing")
            if not w1 >= w0:
                raise SpecError("knot values must be non-decreasing")
        if not all(math.isfinite(r) and math.isfinite(w) for r, w in knots):
            raise SpecError("knots must be finite")
        cumulative = [0.0]
        for (r0, w0), (r1, w1) in zip(knots, knots[1:]):
            cumulative.append(cumulative[-1] + 0.5 * (w0 + w1) * (r1 - r0))
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_radii", tuple(r for r, _ in knots))
        object.__setattr__(self, "_cumulative", tuple(cumulative))

    @property
    def max_radius(self):
        return self._radii[-1]

    def _segment(self, r):
        if r > self._radii[-1]:
            raise BeyondTabulatedRange(
                f"radius {r!r} exceeds the last tabulated knot {self._radii[-1]!r}"
            )
        i = bisect.bisect_right(self._radii, r) - 1
        return min(i, len(self._radii) - 2)

    def _eval(self, r):
        i = self._segment(r)
        (r0, w0), (r1, w1) = self.knots[i], self.knots[i + 1]
        return w0 + (w1 - w0) * (r - r0) / (r1 - r0)

    def _integral(self, v):
        i = self._segment(v)
        r0, w0 = self.knots[i]
        return self._cumulative[i] + 0.5 * (w0 + self._eval(v)) * (v - r0)

    @property
    def strictly_increasing(self):
        return all(w1 > w0 for (_, w0), (_, w1) in zip(self.knots, self.knots[1:]))

    @property
    def is_zero(self):
        return self.knots[-1][1] == 0

    def to_spec(self):
        return {"kind": "table", "knots": [[r, w] for r, w in self.knots]}

    def describe(self):
        tag = ", lower estimate" if self.lower_estimate else ""
        return f"table({len(self.knots)} knots up to r={self.max_radius:.6g}{tag})"


ZERO = LinearModulus(0.0)


@dataclass(frozen=True)
class LipschitzPair:
    """Center-Lipschitz constant ``l0`` and Lipschitz constant ``l``.

    Zero constants are allowed and describe affine maps.
    """

    l0: float
    l: float

    def __post_init__(self):
        for name in ("l0", "l"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise SpecError(f"{name} must be finite and >= 0, got {value!r}")
        if self.l0 > self.l:
            raise SpecError(f"center-Lipschitz l0={self.l0} exceeds Lipschitz l={self.l}")

    @property
    def ratio(self) -> float:
        return self.l0 / self.l if self.l > 0 else math.nan


def eval_modulus(m: ContinuityModulus, r: float) -> float:
    return m(r)


def integral_modulus(m: ContinuityModulus, v: float) -> float:
    return m.integral(v)


def modulus_from_spec(spec: dict) -> ContinuityModulus:
    """Build a modulus from its JSON form (``kind`` = linear/power/exp/table)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("modulus spec must be an object with a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "linear":
            return LinearModulus(float(spec["l0"]))
        if kind == "power":
            return PowerModulus(float(spec["c"]), float(spec["p"]))
        if kind == "exp":
            return ExponentialModulus(float(spec.get("c", 1.0)), float(spec.get("a", 1.0)))
        if kind == "table":
            return PiecewiseLinearModulus(tuple(tuple(k) for k in spec["knots"]))
    except KeyError as exc:
        raise SpecError(f"modulus spec of kind {kind!r} lacks field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad modulus spec: {exc}") from None
    raise SpecError(f"unknown modulus kind {kind!r}")


def jacobian_deviation(lu0: LUFactor, j0: np.ndarray, jx: np.ndarray) -> float:
    """``||F'(x0)^{-1} (F'(x) - F'(x0))||_inf`` given the factored ``F'(x0)``."""
    return operator_norm_inf(lu0.solve(np.asarray(jx, dtype=float) - j0))


def estimate_modulus(sys, radii, dirs_per_radius: int, rng: np.random.Generator):
    """Sample-based lower estimate of the centered modulus of ``sys``.

    For every radius the deviation is maximized over all signed coordinate
    directions and ``dirs_per_radius - 2n`` random directions of unit
    infinity norm. The returned table is the running maximum of those
    values, so it is monotone, but it is only a lower bound of the true
    modulus and is flagged as such.
    """
    radii = [float(r) for r in radii]
    n = sys.dimension
    if not radii:
        raise SpecError("need at least one radius")
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise SpecError("radii must be positive and strictly increasing")
    if radii[-1] > sys.R:
        raise OutOfDomain(f"radius {radii[-1]} exceeds the domain radius {sys.R}")
    if dirs_per_radius < 2 * n:
        raise SpecError(f"dirs_per_radius must be at least 2n = {2 * n}")

    x0 = as_vector(sys.x0)
    j0 = np.asarray(sys.jacobian(x0), dtype=float)
    lu0 = LUFactor(j0)
    eye = np.eye(n)
    directions = [s * eye[i] for i in range(n) for s in (1.0, -1.0)]
    for _ in range(dirs_per_radius - 2 * n):
        d = rng.uniform(-1.0, 1.0, size=n)
        d /= np.max(np.abs(d))
        directions.append(d)

    knots = [(0.0, 0.0)]
    envelope = 0.0
    for r in radii:
        w = max(jacobian_deviation(lu0, j0, sys.jacobian(x0 + r * d)) for d in directions)
        envelope = max(envelope, w)
        knots.append((r, envelope))
    return PiecewiseLinearModulus(tuple(knots), lower_estimate=True)
