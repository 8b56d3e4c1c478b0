"""Exception taxonomy shared by all modules."""


class AffineEnergyError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(AffineEnergyError):
    """Unsupported or inconsistent configuration (scheme, resolution, sample floor)."""


class NumericalDomainError(AffineEnergyError):
    """A numerical quantity left its valid domain (non-finite integrand, ...)."""


class InvalidBodyError(AffineEnergyError):
    """A body violates its invariants (non-positive support, origin not interior)."""


class UnsupportedRepresentationError(AffineEnergyError):
    """Operation requires a representation the body does not carry."""


class DegenerateInputError(AffineEnergyError):
    """Input is degenerate for the requested construction (e.g. f = 0 a.e.)."""


class DomainError(AffineEnergyError, ValueError):
    """Parameter outside the mathematical domain of the operation."""
