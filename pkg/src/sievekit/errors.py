"""Exception types shared across the toolkit."""


class SieveKitError(Exception):
    """Base class for every toolkit-specific error."""


class GcdViolation(SieveKitError):
    """Some form has gcd(a_i, b_i) != 1."""


class ZeroDiscriminant(SieveKitError):
    """Discriminant vanishes (an a_i is zero or two forms are proportional)."""


class DensityZero(SieveKitError):
    """rho(p) = 0 for a prime dividing the requested modulus."""


class ZeroFactor(SieveKitError):
    """rho(p) = p makes a singular-product factor vanish."""


class ZeroValue(SieveKitError):
    """A form vanishes at the requested argument, so Omega is undefined."""


class LimitTooLarge(SieveKitError):
    """Requested table size exceeds the configured memory cap."""


class ToleranceNotMet(SieveKitError):
    """Interval solver could not reach the requested tolerance."""


class RangeOverflow(SieveKitError):
    """Value not representable in double precision; use the log-scaled API."""


class OutOfRange(SieveKitError):
    """Evaluation point lies beyond the solved domain."""


class OutOfValidity(SieveKitError):
    """Argument outside the validity range of an asymptotic formula."""


class QuadratureFailure(SieveKitError):
    """Adaptive quadrature reported a non-converged result."""


class PoleError(SieveKitError):
    """Special function evaluated at a pole."""


class DomainError(SieveKitError):
    """Arguments violate a documented domain restriction."""


class SupportEmpty(SieveKitError):
    """No squarefree support element exists for the given cutoffs."""


class BudgetExceeded(SieveKitError):
    """Enumeration or sieving budget exhausted."""


class DivisionByZero(SieveKitError):
    """f'(m) = 0 for an element of the weight support."""


class InfeasibleB(SieveKitError):
    """Richert weight b would be non-positive for the requested r."""
