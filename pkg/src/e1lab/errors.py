"""Exception hierarchy shared by all e1lab modules.

The CLI maps these onto exit codes: ``DomainError`` subclasses exit with 2,
``NumericalHalt`` subclasses with 3.
"""


class E1LabError(Exception):
    """Base class for all package errors."""


class DomainError(E1LabError, ValueError):
    """Input outside the region where a formula is defined."""


class NumericalHalt(E1LabError, ArithmeticError):
    """A computation stopped because the numerics became untrustworthy."""


class SingularPoint(DomainError):
    """Graph jet with D below the singularity threshold (tangent plane is contact)."""


class DomainExceeded(DomainError):
    """Radius at or beyond the blow-up radius of a closed-form family."""


class NonsmoothInitialData(DomainError):
    """Cauchy data whose Fourier tail is too heavy for the marching schemes."""


class CFLViolation(DomainError):
    """Requested CFL number outside (0, 1]."""


class AmbiguousFit(E1LabError):
    """More than one solution family matches a profile within tolerance."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class NearCharacteristic(NumericalHalt):
    """det A (or s = sin(theta - phi)) is too close to zero."""


class QuadratureUnstable(NumericalHalt):
    """Energy density overflowed the quadrature guard."""


class StepTooLarge(NumericalHalt):
    """Richardson error estimate of an RK4 step exceeded the guard."""


class BlowUp(NumericalHalt):
    """ODE solution left every finite bound; carries the truncated profile."""

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile
