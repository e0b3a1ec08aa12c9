"""Exception types shared across the package."""


class RegimeSegError(ValueError):
    """Base class for all input and parameter errors raised here."""


class ParseError(RegimeSegError):
    """A file could not be parsed; message carries the offending line number."""


class ValidationError(RegimeSegError):
    """Structurally valid input that violates an invariant (shape, range, order)."""


class ParameterError(RegimeSegError):
    """A tuning parameter outside its admissible range."""


class SizeError(RegimeSegError):
    """Request incompatible with the data size (too few rows, too many clusters)."""


class DegenerateInputError(RegimeSegError):
    """Input with no usable variation, e.g. a constant column."""
