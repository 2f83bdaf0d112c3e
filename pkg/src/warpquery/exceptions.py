"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Channel counts or vector lengths do not line up."""


class ParseError(ValueError):
    """A data file could not be parsed; message names the offending line."""


class BoundsError(IndexError):
    """An index, window, or path step falls outside the series or grid."""


class BandError(ValueError):
    """A Sakoe-Chiba band admits no warping path for the given lengths."""


class FeasibilityError(ValueError):
    """The constrained window search space is empty."""


class NotCalibratedError(RuntimeError):
    """A kernel model is required but none has been calibrated."""
