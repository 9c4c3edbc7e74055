"""Semilocal convergence certificates for Newton's method under a centered
continuity modulus of the Jacobian."""

from .criteria import (
    Certificate,
    ComparisonVerdict,
    Criterion,
    check_argyros,
    check_kantorovich,
    check_new_general,
    check_new_lipschitz,
    compare_criteria,
)
from .driver import NewtonTrace, RunOptions, run_certified, run_uncertified
from .majorant import (
    MajorantModel,
    gamma,
    majorant_sequence,
    minimal_fixed_point,
    omega_bound,
    omega_majorant,
    psi,
    rheinboldt_sequence,
)
from .modulus import (
    ExponentialModulus,
    LinearModulus,
    LipschitzPair,
    PiecewiseLinearModulus,
    PowerModulus,
    estimate_modulus,
    eval_modulus,
    integral_modulus,
)
from .problem import NonlinearSystem, eta_of, load_builtin, newton_step

__version__ = "0.1.0"
