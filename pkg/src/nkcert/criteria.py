"""Semilocal convergence criteria for Newton's method.

Three certificates are computed:

``Kantorovich``
    ``l * eta <= 1/2`` with ball radius ``(1 - sqrt(1 - 2 l eta)) / l``.
``NewCondition``
    existence of the minimal fixed point ``v*`` of ``psi`` with
    ``eta < v* <= R``; for ``omega0(r) = l0 r`` this is
    ``l0 * eta <= 3 - 2 sqrt(2)``.
``Argyros``
    a fixed point ``r0`` of the cruder map ``f >= psi`` together with
    ``q(r0) = 2 omega0(r0) / (1 - omega0(r0)) < 1``; for a linear modulus
    ``l0 * eta <= 1/10``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .majorant import (
    MajorantModel,
    accept_fixed_point,
    argyros_map,
    find_fixed_point,
    iterate_to_fixed_point,
    majorant_sequence,
)
from .modulus import LinearModulus, LipschitzPair

NEW_THRESHOLD = 3.0 - 2.0 * math.sqrt(2.0)
CRITICAL_RATIO = 6.0 - 4.0 * math.sqrt(2.0)
KANTOROVICH_THRESHOLD = 0.5
ARGYROS_THRESHOLD = 0.1
# bound quoted for the earlier Newton-like analysis; reported, never derived
EARLIER_ARGYROS_THRESHOLD = (2.0 - math.sqrt(3.0)) / 2.0

BOUNDARY_TOL = 1e-15
Q_MARGIN = 1e-12
ETA_MAX_ATOL = 1e-10

THRESHOLD_EXPRESSIONS = {
    "new": "3-2*sqrt(2)",
    "critical_ratio": "6-4*sqrt(2)",
    "kantorovich": "1/2",
    "argyros": "1/10",
    "earlier_argyros": "(2-sqrt(3))/2",
}


class Criterion(str, enum.Enum):
    KANTOROVICH = "Kantorovich"
    NEW = "NewCondition"
    ARGYROS = "Argyros"


@dataclass(frozen=True)
class Certificate:
    criterion: Criterion
    passed: bool
    eta: float
    eta_max: float
    v_star: float | None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion.value,
            "passed": self.passed,
            "eta": self.eta,
            "eta_max": self.eta_max,
            "v_star": self.v_star,
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Certificate:
        return cls(Criterion(d["criterion"]), bool(d["passed"]), d["eta"], d["eta_max"],
                   d["v_star"], dict(d["diagnostics"]))


@dataclass(frozen=True)
class ComparisonVerdict:
    ratio: float
    critical_ratio: float = CRITICAL_RATIO
    new_weaker_than_kantorovich: bool = False

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "critical_ratio": self.critical_ratio,
            "new_weaker_than_kantorovich": self.new_weaker_than_kantorovich,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ComparisonVerdict:
        return cls(d["ratio"], d["critical_ratio"], bool(d["new_weaker_than_kantorovich"]))


def _within(x: float, bound: float) -> bool:
    return x <= bound + BOUNDARY_TOL


def check_kantorovich(pair: LipschitzPair, eta: float) -> Certificate:
    l = pair.l
    h = l * eta
    eta_max = 1.0 / (2.0 * l) if l > 0 else math.inf
    passed = _within(h, KANTOROVICH_THRESHOLD)
    v_star = None
    if passed:
        # minimal root of eta - v + l v^2 / 2, written without cancellation
        v_star = 2.0 * eta / (1.0 + math.sqrt(max(0.0, 1.0 - 2.0 * h)))
    return Certificate(Criterion.KANTOROVICH, passed, eta, eta_max, v_star,
                       {"l_eta": h, "threshold": KANTOROVICH_THRESHOLD})


def discriminant(lam: float) -> float:
    """``D = lam^2 - 6 lam + 1`` in factored form, exact at its lower root."""
    return (lam - NEW_THRESHOLD) * (lam - (3.0 + 2.0 * math.sqrt(2.0)))


def new_lipschitz_root(l0: float, eta: float) -> float:
    """Minimal root of ``2 l0 v^2 - (1 + l0 eta) v + eta = 0``.

    Uses ``v = 2 eta / ((1 + l0 eta) + sqrt(D))``; at ``l0 = 0`` this gives
    ``v = eta``.
    """
    lam = l0 * eta
    disc = max(0.0, discriminant(lam))
    return 2.0 * eta / ((1.0 + lam) + math.sqrt(disc))


def new_lipschitz_eta_max(l0: float, R: float) -> float:
    if l0 == 0:
        return math.inf
    eta_max = NEW_THRESHOLD / l0
    if R < new_lipschitz_root(l0, eta_max):
        # v*(eta) = R  <=>  eta = R (1 - 2 l0 R) / (1 - l0 R)
        eta_max = R * (1.0 - 2.0 * l0 * R) / (1.0 - l0 * R)
    return eta_max


def check_new_lipschitz(pair: LipschitzPair, eta: float, R: float) -> Certificate:
    """New condition for ``omega0(r) = l0 r`` in closed form.

    ``eta_max`` is ``(3 - 2 sqrt 2) / l0`` unless the ball radius ``R`` binds
    first, in which case it is the ``eta`` at which ``v*`` reaches ``R``.
    """
    l0 = pair.l0
    lam = l0 * eta
    disc = discriminant(lam)
    diagnostics = {"l0_eta": lam, "discriminant": disc, "threshold": NEW_THRESHOLD}
    eta_max = new_lipschitz_eta_max(l0, R)
    v_star = None
    passed = False
    if _within(lam, NEW_THRESHOLD):
        root = new_lipschitz_root(l0, eta)
        diagnostics["root"] = root
        if _within(root, R):
            passed = True
            v_star = root
    return Certificate(Criterion.NEW, passed, eta, eta_max, v_star, diagnostics)


def _bisect_eta_max(passes, upper: float) -> float:
    if passes(upper):
        return upper
    lo, hi = 0.0, upper
    while hi - lo > ETA_MAX_ATOL:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo


def check_new_general(model: MajorantModel, with_eta_max: bool = True) -> Certificate:
    """New condition for an arbitrary modulus via the fixed point of ``psi``.

    ``eta_max`` comes from bisection in ``eta`` over ``[0, R]`` (absolute
    accuracy 1e-10) and costs ~35 fixed-point solves; pass
    ``with_eta_max=False`` to skip it (the field is then NaN). Linear moduli
    use the closed form instead.
    """
    seq = majorant_sequence(model)
    fp = accept_fixed_point(model, seq)
    diagnostics: dict = {"sequence_status": seq.status.value, "iterations": seq.iterations}
    if fp is not None:
        diagnostics["degenerate"] = fp.degenerate
        diagnostics["omega0_at_v_star"] = model.modulus(fp.value)
    if isinstance(model.modulus, LinearModulus):
        eta_max = min(new_lipschitz_eta_max(model.modulus.l0, model.radius), model.radius)
    elif with_eta_max:
        eta_max = _bisect_eta_max(
            lambda e: find_fixed_point(model.with_eta(e)) is not None, model.radius)
    else:
        eta_max = math.nan
    return Certificate(Criterion.NEW, fp is not None, model.eta, eta_max,
                       None if fp is None else fp.value, diagnostics)


def _argyros_root(model: MajorantModel):
    return iterate_to_fixed_point(lambda v: argyros_map(model, v), model.radius)


def _argyros_passes(model: MajorantModel, seq) -> bool:
    if not seq.converged:
        return False
    r0 = seq.v_star
    if model.eta > 0 and not 0 < r0 <= model.radius:
        return False
    return model.modulus(r0) < 1.0 / 3.0 - Q_MARGIN


def check_argyros(model: MajorantModel, with_eta_max: bool = True) -> Certificate:
    """Argyros-type certificate: fixed point ``r0`` of ``f`` and ``q(r0) < 1``.

    ``q(r0) < 1`` is tested as ``omega0(r0) < 1/3 - 1e-12``.
    """
    seq = _argyros_root(model)
    passed = _argyros_passes(model, seq)
    diagnostics: dict = {"sequence_status": seq.status.value}
    r0 = seq.v_star if seq.converged else None
    if r0 is not None:
        w = model.modulus(r0)
        diagnostics["r0"] = r0
        diagnostics["q_r0"] = 2.0 * w / (1.0 - w) if w < 1 else math.inf
    m = model.modulus
    if isinstance(m, LinearModulus):
        # (5/2) l0 v^2 - v + eta = 0 has a root iff 10 l0 eta <= 1
        eta_max = ARGYROS_THRESHOLD / m.l0 if m.l0 > 0 else math.inf
        if m.l0 > 0 and model.radius < 1.0 / (5.0 * m.l0):
            eta_max = model.radius - 2.5 * m.l0 * model.radius ** 2
        eta_max = min(eta_max, model.radius)
    elif with_eta_max:
        eta_max = _bisect_eta_max(
            lambda e: _argyros_passes(model.with_eta(e), _argyros_root(model.with_eta(e))),
            model.radius)
    else:
        eta_max = math.nan
    return Certificate(Criterion.ARGYROS, passed, model.eta, eta_max,
                       r0 if passed else None, diagnostics)


def compare_criteria(pair: LipschitzPair, eta: float, R: float):
    """Run all three certificates for ``omega0(r) = l0 r``.

    Returns ``(verdict, [kantorovich, new, argyros])``. The new condition is
    weaker than Kantorovich's exactly when ``l0 / l < 6 - 4 sqrt 2``.
    """
    ratio = pair.ratio
    verdict = ComparisonVerdict(ratio, CRITICAL_RATIO,
                                bool(pair.l > 0 and ratio < CRITICAL_RATIO))
    model = MajorantModel(LinearModulus(pair.l0), eta, R)
    certificates = [
        check_kantorovich(pair, eta),
        check_new_lipschitz(pair, eta, R),
        check_argyros(model),
    ]
    certificates[1].diagnostics.update({
        "eta_max_times_l0": NEW_THRESHOLD,
        "argyros_eta_max_times_l0": ARGYROS_THRESHOLD,
        "earlier_argyros_eta_max_times_l0": EARLIER_ARGYROS_THRESHOLD,
    })
    return verdict, certificates
