"""Semantic exception hierarchy for evolvesim."""


class EvolvesimError(Exception):
    """Base class for all library errors."""


class InputDomainError(EvolvesimError, ValueError):
    """An argument is outside the operation's domain (non-finite, wrong sign, ...)."""


class DimensionMismatchError(EvolvesimError, ValueError):
    """Vector dimensions of interacting objects disagree."""


class MarginViolationError(EvolvesimError, ValueError):
    """A target halfspace evaluates to exactly zero on a support point."""


class CertificationError(EvolvesimError, ValueError):
    """A loss function required to be well-behaved failed certification."""


class ConstructionError(EvolvesimError, ValueError):
    """An exact combinatorial construction failed an internal consistency check."""


class ResourceLimitError(EvolvesimError, RuntimeError):
    """Derived run parameters exceed the configured evaluation budget."""

    def __init__(self, message: str, magnitude: float | None = None):
        super().__init__(message)
        self.magnitude = magnitude


class ConfigError(EvolvesimError, ValueError):
    """An experiment configuration is malformed; carries the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
