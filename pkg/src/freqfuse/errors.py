"""Exception hierarchy shared by every module."""


class FreqFuseError(ValueError):
    """Base class for data and parameter errors raised by this package."""


class DimensionError(FreqFuseError):
    pass


class FormatError(FreqFuseError):
    pass


class ClipIOError(FreqFuseError, OSError):
    pass


class ParameterError(FreqFuseError):
    pass


class InsufficientFramesError(FreqFuseError):
    pass


class UnsupportedChannelsError(FreqFuseError):
    pass


class MissingInputError(FreqFuseError):
    pass


class NumericError(FreqFuseError):
    """A metric or kernel produced a non-finite value."""
