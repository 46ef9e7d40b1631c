"""Exception types raised by the solver stack."""


class SpinJCError(Exception):
    """Base class for all package errors."""


class DimensionError(SpinJCError, ValueError):
    """Operator or state does not fit the Hilbert space it is used with."""


class NoRoot(SpinJCError):
    """No sign change of the resonance determinant inside the search window."""


class NonUnique(SpinJCError):
    """The Liouvillian has more than one stationary state."""


class NotConverged(SpinJCError):
    """Steady-state residual stayed above tolerance."""


class TruncationSuspect(SpinJCError):
    """Photon population at the Fock cutoff exceeds the truncation threshold.

    The offending state is attached so callers may escalate the cutoff or
    accept the result with a flag.
    """

    def __init__(self, message, rho=None, top_population=None):
        super().__init__(message)
        self.rho = rho
        self.top_population = top_population


class ZeroPhotonNumber(SpinJCError):
    """Photon-number fraction requested for a state with no photons."""


class UndefinedCorrelation(SpinJCError):
    """Correlation denominator vanishes (vacuum-dominated state)."""


class IntegrationFailure(SpinJCError):
    """Time propagation did not complete."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
