"""Exception types shared across the package."""


class MaoiiError(Exception):
    """Base class for all package-specific errors."""


class RangeError(MaoiiError):
    """A parameter is outside its admissible range (probabilities, counts)."""


class ConstraintViolated(MaoiiError):
    """p + (N-1)r = 1 violated beyond tolerance at construction."""


class RegimeViolated(MaoiiError):
    """p < r: outside the studied sticky-source regime."""


class DegenerateParams(MaoiiError):
    """A closed form is undefined for these parameters (e.g. r = 0)."""


class NonConvergent(MaoiiError):
    """A truncated series could not meet its tail bound within the iteration cap."""


class NotConverged(MaoiiError):
    """Value iteration exhausted its iteration cap before reaching tolerance."""


class NotThreshold(MaoiiError):
    """The optimal action pattern is not a single idle/transmit cut.

    Carries the first offending state index in ``state``.
    """

    def __init__(self, state: int, message: str | None = None):
        self.state = state
        super().__init__(message or f"action pattern is not a single cut at state {state}")


class BracketFailure(MaoiiError):
    """Geometric bracket growth failed to enclose the index."""


class TruncationError(MaoiiError):
    """State-space truncation is too tight for the quantity being computed."""


class MonotonicityViolation(MaoiiError):
    """An index table is not nondecreasing.

    Carries the first offending entry in ``n``.
    """

    def __init__(self, n: int, message: str | None = None):
        self.n = n
        super().__init__(message or f"index table decreases at n={n}")


class LadderOverflow(MaoiiError):
    """A ladder index exceeded the precomputed table length."""


class ConfigError(MaoiiError):
    """Invalid simulation or experiment configuration."""


class ParseError(MaoiiError):
    """A scenario or grid file could not be parsed."""


class ValidationError(MaoiiError):
    """A parsed scenario or grid file violates a documented invariant."""
