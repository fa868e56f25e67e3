"""Exception hierarchy shared by all nlmrp modules."""


class NlmrpError(Exception):
    """Base class for every error raised by nlmrp."""


class NeighborsUnavailable(NlmrpError):
    """The macroblock lacks a left, above or above-left neighbor."""


class OutOfBounds(NlmrpError):
    pass


class DimensionMismatch(NlmrpError):
    pass


class MvOutOfRange(NlmrpError):
    pass


class MalformedBitstream(NlmrpError):
    pass


class InsufficientPoints(NlmrpError):
    pass


class NoOverlap(NlmrpError):
    pass


class ParseError(NlmrpError):
    pass


class GeometryError(NlmrpError):
    pass
