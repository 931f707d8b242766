"""Exception types raised across the package."""


class PwotError(Exception):
    """Base class for all tracker errors."""


class ConfigurationError(PwotError, ValueError):
    """An argument or configuration value is outside its supported range."""


class DimensionError(PwotError, ValueError):
    """A bit pattern or frame does not have the expected size."""


class ClippingError(PwotError, ValueError):
    """A rectangle extends beyond the frame it is applied to."""


class OrderingError(PwotError, ValueError):
    """Positions were pushed with non-increasing frame indices."""


class TrackingLostError(PwotError, RuntimeError):
    """No search region could be evaluated in the current frame."""


class EmptyInputError(PwotError, ValueError):
    """A frame directory contained no decodable frames."""


class FrameSizeMismatchError(PwotError, ValueError):
    """Frames in one sequence have different dimensions."""


class UnreadableFrameError(PwotError, OSError):
    """A frame file could not be decoded."""
