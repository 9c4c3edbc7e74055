"""Nonlinear systems, the Newton map, and the builtin problem corpus.

All constants attached to a problem are affine invariant: they bound
``F'(x0)^{-1} (F'(x) - F'(x0))`` (center modulus) or
``F'(x0)^{-1} (F'(x) - F'(y))`` (Lipschitz constant) in the infinity norm.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import OutOfDomain, SpecError, UnknownProblem
from .expression import ExpressionSystem
from .modulus import (
    ContinuityModulus,
    ExponentialModulus,
    LinearModulus,
    LipschitzPair,
    ZERO,
    jacobian_deviation,
    modulus_from_spec,
)
from .numerics import LUFactor, as_matrix, as_vector, norm_inf, operator_norm_inf, solve_linear

DOMAIN_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class NonlinearSystem:
    """``F: R^n -> R^n`` with analytic Jacobian, start ``x0`` and ball radius ``R``."""

    F: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    x0: np.ndarray
    R: float
    name: str = "system"

    def __post_init__(self):
        object.__setattr__(self, "x0", as_vector(self.x0))
        if not (self.R > 0 and math.isfinite(self.R)):
            raise SpecError(f"domain radius R must be positive and finite, got {self.R!r}")
        # raises SingularMatrix when F'(x0) is not invertible
        LUFactor(self.jac(self.x0))

    @property
    def dimension(self) -> int:
        return self.x0.size

    def f(self, x) -> np.ndarray:
        return as_vector(self.F(np.asarray(x, dtype=float))).reshape(self.dimension)

    def jac(self, x) -> np.ndarray:
        return as_matrix(self.jacobian(np.asarray(x, dtype=float))).reshape(
            self.dimension, self.dimension)

    def distance(self, x) -> float:
        return norm_inf(np.asarray(x, dtype=float) - self.x0)

    def check_domain(self, x) -> None:
        d = self.distance(x)
        if d > self.R * (1 + DOMAIN_SLACK):
            raise OutOfDomain(f"point at distance {d:.6g} from x0 leaves the ball of radius {self.R:.6g}")


def newton_step(sys: NonlinearSystem, x) -> np.ndarray:
    """One Newton step ``T(x) = x - F'(x)^{-1} F(x)``."""
    x = as_vector(x)
    sys.check_domain(x)
    return x - solve_linear(sys.jac(x), sys.f(x))


def eta_of(sys: NonlinearSystem) -> float:
    """Length of the first Newton step, the smallest admissible ``eta``."""
    return norm_inf(solve_linear(sys.jac(sys.x0), sys.f(sys.x0)))


@dataclass(frozen=True, eq=False)
class BuiltinProblem:
    system: NonlinearSystem
    analytic_modulus: ContinuityModulus
    analytic_l0: float | None = None
    analytic_l: float | None = None

    @property
    def name(self) -> str:
        return self.system.name

    @property
    def lipschitz_pair(self) -> LipschitzPair | None:
        if self.analytic_l0 is None or self.analytic_l is None:
            return None
        return LipschitzPair(self.analytic_l0, self.analytic_l)


def _scalar_sqrt2(x0=1.4, R=None):
    x0 = float(np.ravel([x0])[0])
    if x0 <= 0:
        raise SpecError("scalar-sqrt2 needs x0 > 0")
    R = 0.5 * x0 if R is None else float(R)
    if R >= x0:
        raise SpecError("scalar-sqrt2 needs R < x0 so that F' stays invertible")
    sys = NonlinearSystem(
        F=lambda x: np.array([x[0] ** 2 - 2.0]),
        jacobian=lambda x: np.array([[2.0 * x[0]]]),
        x0=[x0], R=R, name="scalar-sqrt2",
    )
    # (2x - 2x0) / (2x0) = (x - x0) / x0
    return BuiltinProblem(sys, LinearModulus(1.0 / x0), 1.0 / x0, 1.0 / x0)


def _scalar_exp(x0=0.2, R=0.5):
    x0 = float(np.ravel([x0])[0])
    R = float(R)
    sys = NonlinearSystem(
        F=lambda x: np.array([math.exp(x[0]) - 1.1]),
        jacobian=lambda x: np.array([[math.exp(x[0])]]),
        x0=[x0], R=R, name="scalar-exp",
    )
    # e^{-x0}(e^x - e^{x0}) = e^{x - x0} - 1; over the ball the slope of this
    # map never exceeds e^R, and its secant from x0 never exceeds (e^R - 1)/R
    return BuiltinProblem(sys, ExponentialModulus(1.0, 1.0), math.expm1(R) / R, math.exp(R))


def _quadratic_2d(x0=(1.1, 1.9), R=0.5):
    x0 = as_vector(x0)
    if x0.size != 2:
        raise SpecError("2d-quadratic needs a 2-vector x0")

    def F(x):
        return np.array([x[0] ** 2 + x[1] - 3.0, x[0] + x[1] ** 2 - 5.0])

    def J(x):
        return np.array([[2.0 * x[0], 1.0], [1.0, 2.0 * x[1]]])

    sys = NonlinearSystem(F=F, jacobian=J, x0=x0, R=float(R), name="2d-quadratic")
    # J(x) - J(y) = 2 diag(x - y); with |x_i - y_i| <= r the infinity norm of
    # J0^{-1} diag(.) is attained at full-magnitude entries: 2 r ||J0^{-1}||
    l0 = 2.0 * operator_norm_inf(np.linalg.inv(J(x0)))
    return BuiltinProblem(sys, LinearModulus(l0), l0, l0)


_AFFINE_A = np.array([[3.0, 1.0, 0.0], [1.0, 2.0, -1.0], [0.0, 1.0, 4.0]])
_AFFINE_C = np.array([1.0, -1.0, 0.5])


def _affine(x0=(0.0, 0.0, 0.0), R=2.0):
    def F(x):
        return _AFFINE_A @ (np.asarray(x) - _AFFINE_C)

    sys = NonlinearSystem(F=F, jacobian=lambda x: _AFFINE_A.copy(), x0=x0, R=float(R), name="affine")
    return BuiltinProblem(sys, ZERO, 0.0, 0.0)


BUILTINS = {
    "scalar-sqrt2": _scalar_sqrt2,
    "scalar-exp": _scalar_exp,
    "2d-quadratic": _quadratic_2d,
    "affine": _affine,
}


def load_builtin(name: str, **params) -> BuiltinProblem:
    """Instantiate a corpus problem; ``params`` may override ``x0`` and ``R``."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise UnknownProblem(f"unknown builtin problem {name!r}; known: {', '.join(BUILTINS)}") from None
    return factory(**{k: v for k, v in params.items() if v is not None})


def modulus_bound_gap(problem: BuiltinProblem, n_samples: int = 100, rng=None) -> float:
    """Largest violation of the shipped modulus bound over random ball points.

    Returns ``max(deviation(x) - omega0(||x - x0||))``; a non-positive value
    means the analytic modulus held at every sample.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    sys = problem.system
    j0 = sys.jac(sys.x0)
    lu0 = LUFactor(j0)
    worst = -math.inf
    for _ in range(n_samples):
        x = sys.x0 + rng.uniform(-sys.R, sys.R, size=sys.dimension)
        r = sys.distance(x)
        worst = max(worst, jacobian_deviation(lu0, j0, sys.jac(x)) - problem.analytic_modulus(r))
    return worst


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A parsed problem file: the problem plus whatever constants it declares."""

    system: NonlinearSystem
    modulus: ContinuityModulus | None = None
    pair: LipschitzPair | None = None


def problem_from_spec(spec: dict) -> ProblemSpec:
    if not isinstance(spec, dict):
        raise SpecError("problem spec must be a JSON object")
    modulus = modulus_from_spec(spec["modulus"]) if "modulus" in spec else None
    pair = None
    if "lipschitz" in spec:
        lip = spec["lipschitz"]
        try:
            pair = LipschitzPair(float(lip["l0"]), float(lip["l"]))
        except (KeyError, TypeError) as exc:
            raise SpecError(f"'lipschitz' needs numeric fields l0 and l ({exc})") from None

    if "builtin" in spec:
        problem = load_builtin(spec["builtin"], x0=spec.get("x0"), R=spec.get("R"))
        return ProblemSpec(
            problem.system,
            modulus if modulus is not None else problem.analytic_modulus,
            pair if pair is not None else problem.lipschitz_pair,
        )

    try:
        n = int(spec["dimension"])
        x0 = as_vector(spec["x0"])
        R = float(spec["R"])
        components = spec["expression"]
    except KeyError as exc:
        raise SpecError(f"problem spec lacks field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad problem spec: {exc}") from None
    if isinstance(components, str):
        components = [components]
    if len(components) != n or x0.size != n:
        raise SpecError(f"dimension {n} does not match x0 ({x0.size}) or expression count ({len(components)})")
    expr = ExpressionSystem(list(components))
    system = NonlinearSystem(expr.F, expr.jacobian, x0, R, name=spec.get("name", "expression"))
    return ProblemSpec(system, modulus, pair)


def load_problem_file(path) -> ProblemSpec:
    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None
    return problem_from_spec(spec)


def load_modulus_file(path) -> ContinuityModulus:
    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None
    return modulus_from_spec(spec)
