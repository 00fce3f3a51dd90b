"""Exception hierarchy shared by every module."""


class SobolBoundsError(Exception):
    """Base class for all package errors."""


class OutsideSupport(SobolBoundsError, ValueError):
    pass


class UnsupportedForBounds(SobolBoundsError):
    """The input law does not satisfy the assumptions of the Fisher (score) bound."""


class EmptyMass(SobolBoundsError, ValueError):
    pass


class UnboundedSupport(SobolBoundsError, ValueError):
    pass


class SingularMass(SobolBoundsError):
    pass


class NoClosedForm(SobolBoundsError):
    pass


class OutOfRange(SobolBoundsError, IndexError):
    pass


class DegenerateSpectrum(SobolBoundsError):
    pass


class MissingGradients(SobolBoundsError):
    pass


class InactiveIndex(SobolBoundsError, ValueError):
    pass


class MixedPattern(SobolBoundsError, ValueError):
    pass


class NotUniform01(SobolBoundsError):
    pass


class DimensionTooLarge(SobolBoundsError, ValueError):
    pass


class InvalidPhysicalParams(SobolBoundsError, ValueError):
    pass


class NoAnalyticForm(SobolBoundsError):
    pass


class ConfigInvalid(SobolBoundsError, ValueError):
    pass


class ModelUnknown(SobolBoundsError, KeyError):
    pass
