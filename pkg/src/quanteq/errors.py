"""Exception hierarchy shared across the library."""


class QuantEqError(Exception):
    """Base class for all library-specific errors."""


class DomainError(QuantEqError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ZeroMassInterval(QuantEqError):
    """A truncation interval carries too little probability mass to yield a
    stable conditional moment."""


class NonPositiveDensity(QuantEqError):
    """A density evaluated to a non-positive value where positivity is
    required."""


class BinCollapse(QuantEqError):
    """A best-response step produced a degenerate partition: an edge left the
    support or two edges merged."""


class NoEquilibrium(QuantEqError):
    """No equilibrium with the requested number of bins exists for this
    source and bias."""


class PropagationFailure(QuantEqError):
    """Forward propagation of the shooting construction hit a state with no
    admissible continuation inside the support."""
