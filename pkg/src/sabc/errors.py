"""Exception types shared across the package."""


class SabcError(Exception):
    """Base class for all package errors."""


class ConfigError(SabcError):
    """Invalid configuration, dictionary, or dataset input."""


class SamplerError(SabcError):
    """The sampler could not make progress."""


class AcceptanceBudgetError(SamplerError):
    """Draw budget exhausted before a population filled."""

    def __init__(self, message, draws, accepted):
        super().__init__(message)
        self.draws = draws
        self.accepted = accepted


class StallError(SamplerError):
    """No active particles survive the next threshold."""


class GmmError(SabcError):
    """Mixture fitting failed."""


class SingularComponentError(GmmError):
    """A mixture component collapsed during EM."""
