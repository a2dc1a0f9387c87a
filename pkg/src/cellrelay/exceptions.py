"""Exception types raised by cellrelay."""


class CellRelayError(Exception):
    """Base class for all package errors."""


class ConfigError(CellRelayError, ValueError):
    """A configuration or scenario violates one of its invariants."""


class DegenerateDenominator(CellRelayError, ZeroDivisionError):
    """Both weighted link PERs are zero, so the adaptive split is 0/0."""


class EmptyDistribution(CellRelayError, ValueError):
    """A rate distribution to sample from has no members."""


class ComplexityGuard(CellRelayError, RuntimeError):
    """An exhaustive enumeration would exceed the configured outcome budget."""
