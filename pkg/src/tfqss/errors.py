"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the physical or mathematical domain of an operation."""


class SamplingBoundError(RuntimeError):
    """The random-sampling tail bound is not applicable for the given sizes.

    Raised when the logarithmic factor inside the bound is non-positive, which
    happens for very small test sets or very loose failure probabilities.  The
    caller can retry with the Serfling bound, which has no such restriction.
    """


class InsufficientSampleError(ValueError):
    """The sifted string is too short for the requested number of test bits."""


class ConfigError(ValueError):
    """A scenario configuration document is malformed or out of range."""
