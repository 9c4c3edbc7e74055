"""Newton iterations audited against the a priori majorant bounds."""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .criteria import Certificate, check_new_general
from .errors import NotCertified, SingularMatrix, SpecError
from .majorant import MajorantModel, majorant_values
from .numerics import norm_inf, solve_linear
from .problem import NonlinearSystem, eta_of

logger = logging.getLogger(__name__)

AUDIT_SLACK = 1e-9
ETA_RTOL = 1e-12


class AuditMode(str, enum.Enum):
    STRICT = "strict"
    RECORD = "record"


class TraceStatus(str, enum.Enum):
    CONVERGED = "ConvergedToRoot"
    AUDIT_VIOLATION = "AuditViolation"
    SINGULAR_JACOBIAN = "SingularJacobian"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class RunOptions:
    max_iterations: int = 100
    residual_tol: float = 1e-12
    step_tol: float = 1e-14
    audit_mode: AuditMode = AuditMode.STRICT

    def __post_init__(self):
        if self.max_iterations < 1:
            raise SpecError("max_iterations must be >= 1")
        if not (self.residual_tol > 0 and self.step_tol > 0):
            raise SpecError("tolerances must be positive")
        object.__setattr__(self, "audit_mode", AuditMode(self.audit_mode))


@dataclass
class StepAudit:
    """Checks attached to iterate ``k``.

    ``step_bound_ok`` compares ``||x_{k+1} - x_k||`` with ``v_{k+1} - v_k``
    (None for the last iterate); ``ball_ok`` checks ``||x_k - x0|| <= v*``;
    ``limit_ok`` checks ``||x_final - x_k|| <= v* - v_k`` once the run has
    converged (None otherwise).
    """

    step_bound_ok: bool | None
    ball_ok: bool
    limit_ok: bool | None = None


@dataclass
class NewtonTrace:
    iterates: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    majorant_values: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    audits: list = field(default_factory=list)
    status: TraceStatus = TraceStatus.MAX_ITERATIONS
    x_star: np.ndarray | None = None
    v_star: float | None = None
    certificate: Certificate | None = None

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    @property
    def final_error_bound(self) -> float | None:
        """``v* - v_K``: a priori bound on the distance of the last iterate to x*."""
        if self.v_star is None or not self.majorant_values:
            return None
        return max(0.0, self.v_star - self.majorant_values[min(self.iterations, len(self.majorant_values) - 1)])

    @property
    def audits_passed(self) -> bool:
        return all(
            a.ball_ok and a.step_bound_ok is not False and a.limit_ok is not False
            for a in self.audits
        )

    @property
    def final_residual(self) -> float:
        return self.residual_norms[-1] if self.residual_norms else float("nan")


def _newton_loop(sys: NonlinearSystem, opts: RunOptions, trace: NewtonTrace, audit=None):
    x = sys.x0.copy()
    trace.iterates.append(x)
    trace.residual_norms.append(norm_inf(sys.f(x)))
    for k in range(opts.max_iterations + 1):
        if trace.residual_norms[-1] <= opts.residual_tol:
            trace.status = TraceStatus.CONVERGED
            return
        if k == opts.max_iterations:
            trace.status = TraceStatus.MAX_ITERATIONS
            return
        try:
            x_new = x - solve_linear(sys.jac(x), sys.f(x))
        except SingularMatrix as exc:
            logger.info("Newton step %d undefined: %s", k, exc)
            trace.status = TraceStatus.SINGULAR_JACOBIAN
            return
        sys.check_domain(x_new)
        step = norm_inf(x_new - x)
        trace.step_norms.append(step)
        trace.iterates.append(x_new)
        trace.residual_norms.append(norm_inf(sys.f(x_new)))
        x = x_new
        if audit is not None and not audit(k) and opts.audit_mode is AuditMode.STRICT:
            trace.status = TraceStatus.AUDIT_VIOLATION
            return
        if step <= opts.step_tol:
            trace.status = (TraceStatus.CONVERGED if trace.residual_norms[-1] <= opts.residual_tol
                            else TraceStatus.MAX_ITERATIONS)
            return


def run_uncertified(sys: NonlinearSystem, opts: RunOptions = RunOptions()) -> NewtonTrace:
    """Plain Newton iteration with no majorant bookkeeping."""
    trace = NewtonTrace()
    _newton_loop(sys, opts, trace)
    if trace.status is TraceStatus.CONVERGED:
        trace.x_star = trace.iterates[-1]
    return trace


def run_certified(sys: NonlinearSystem, model: MajorantModel,
                  opts: RunOptions = RunOptions()) -> NewtonTrace:
    """Newton iteration audited step by step against the majorizing sequence.

    The certificate for ``model`` is computed first. In strict mode a failed
    certificate raises :class:`NotCertified`; in record mode it only warns,
    and the audits then fall back to the domain radius ``R`` for the ball.

    Every step ``k`` checks ``||x_{k+1} - x_k|| <= v_{k+1} - v_k`` and
    ``||x_k - x0|| <= v*`` with slack ``1e-9 max(1, v*)``. After a converged
    run the final iterate stands in for ``x*`` and
    ``||x_final - x_k|| <= v* - v_k`` is checked for every ``k``.

    Raises
    ------
    NotCertified
        strict mode and the new condition fails.
    SpecError
        ``model.eta`` is below the first Newton step length.
    OutOfDomain
        an iterate leaves the ball of radius ``R``.
    """
    eta0 = eta_of(sys)
    if model.eta < eta0 * (1 - ETA_RTOL):
        raise SpecError(f"model eta={model.eta!r} is below the first step length {eta0!r}")
    cert = check_new_general(model, with_eta_max=False)
    if not cert.passed:
        message = (f"new convergence condition fails for eta={model.eta:.6g}, R={model.radius:.6g} "
                   f"({cert.diagnostics.get('sequence_status')})")
        if opts.audit_mode is AuditMode.STRICT:
            raise NotCertified(message)
        warnings.warn(message, RuntimeWarning, stacklevel=2)

    v_star = cert.v_star
    ball = v_star if v_star is not None else model.radius
    slack = AUDIT_SLACK * max(1.0, ball)
    trace = NewtonTrace(v_star=v_star, certificate=cert)
    try:
        trace.majorant_values = majorant_values(model, opts.max_iterations + 1, v_star)
    except ArithmeticError:
        trace.majorant_values = []
    vs = trace.majorant_values

    def audit(k):
        # called after x_{k+1} was appended
        x_k = trace.iterates[k]
        if k + 1 < len(vs):
            step_ok = trace.step_norms[k] <= vs[k + 1] - vs[k] + slack
        else:
            step_ok = False
        ball_ok = sys.distance(x_k) <= ball + slack
        trace.audits.append(StepAudit(step_ok, ball_ok))
        ok = step_ok and ball_ok
        if not ok:
            logger.warning("audit violation at step %d: step %.3e vs majorant increment, ball %s",
                           k, trace.step_norms[k], ball_ok)
        return ok

    _newton_loop(sys, opts, trace, audit)
    last = trace.iterates[-1]
    trace.audits.append(StepAudit(None, sys.distance(last) <= ball + slack))
    if trace.status is TraceStatus.CONVERGED and trace.audits[-1].ball_ok is False \
            and opts.audit_mode is AuditMode.STRICT:
        trace.status = TraceStatus.AUDIT_VIOLATION

    if trace.status is TraceStatus.CONVERGED:
        trace.x_star = last
        if v_star is not None:
            for k, a in enumerate(trace.audits):
                v_k = vs[k] if k < len(vs) else v_star
                a.limit_ok = norm_inf(last - trace.iterates[k]) <= v_star - v_k + slack
    return trace
