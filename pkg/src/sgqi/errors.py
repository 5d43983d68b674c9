"""Exception hierarchy shared by all sgqi modules."""


class SGQIError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SGQIError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class CapabilityError(SGQIError, NotImplementedError):
    """The request is well posed but not supported (e.g. derivative order 3)."""


class SingularityError(SGQIError, ArithmeticError):
    """Evaluation hits a point where the quantity is singular."""


class ResourceError(SGQIError, RuntimeError):
    """A grid would exceed the configured node budget."""


class DataError(SGQIError, ValueError):
    """Sampled data is unusable, e.g. a non-finite function value."""


class ConfigError(SGQIError, ValueError):
    """An experiment configuration is malformed."""
