"""Exception hierarchy shared by all modules."""


class AgpartError(Exception):
    """Base class for library errors."""


class DisconnectedGraph(AgpartError):
    pass


class DegenerateMatrix(AgpartError):
    pass


class ShapeMismatch(AgpartError, ValueError):
    pass


class EmptyGraph(AgpartError):
    pass


class EmptyCurve(AgpartError, ValueError):
    pass


class GridMismatch(AgpartError, ValueError):
    pass


class BundleMismatch(AgpartError, ValueError):
    pass


class EmptySet(AgpartError, ValueError):
    pass


class KTooLarge(AgpartError, ValueError):
    pass


class InvalidCenters(AgpartError, ValueError):
    pass


class BadDelta(AgpartError, ValueError):
    pass


class DisconnectedTarget(AgpartError):
    pass


class InfeasibleInit(AgpartError, ValueError):
    pass


class MissingTrace(AgpartError):
    pass


class DisconnectedSample(AgpartError):
    pass


class BadLevel(AgpartError, ValueError):
    pass


class SizeMismatch(AgpartError, ValueError):
    pass


class DimensionMismatch(AgpartError, ValueError):
    pass


class ConfigError(AgpartError):
    pass


class AttributesRequired(AgpartError):
    pass
