"""Exception hierarchy shared by all modules."""


class NKCertError(Exception):
    """Base class for every error raised by nkcert."""


class SingularMatrix(NKCertError, ArithmeticError):
    """LU elimination met a pivot below the singularity threshold."""


class NonConvergedQuadrature(NKCertError, ArithmeticError):
    """Adaptive Simpson exceeded its recursion budget."""


class OutOfDomain(NKCertError, ValueError):
    """A point left the closed domain ball around x0."""


class UnknownProblem(NKCertError, KeyError):
    """No builtin problem is registered under the requested name."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown problem"


class BeyondTabulatedRange(NKCertError, ValueError):
    """A tabulated modulus was evaluated past its last knot."""


class ModulusSaturated(NKCertError, ArithmeticError):
    """omega0(s) reached 1, so gamma(s) = 1/(1 - omega0(s)) is undefined."""


class NotCertified(NKCertError):
    """A certified run was requested but the convergence condition fails."""


class SpecError(NKCertError, ValueError):
    """A problem, modulus or grid specification is malformed."""
