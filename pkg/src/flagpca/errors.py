"""Exception types raised by flagpca."""


class FlagPCAError(ValueError):
    """Base class for all flagpca errors."""


class NonIncreasingSignature(FlagPCAError):
    pass


class AmbientTooSmall(FlagPCAError):
    pass


class DimensionMismatch(FlagPCAError):
    pass


class TypeMismatch(FlagPCAError):
    pass


class RankDeficient(FlagPCAError):
    pass


class RankCollapse(FlagPCAError):
    pass


class NonFinite(FlagPCAError):
    pass


class BadDims(FlagPCAError):
    pass


class CutLocus(FlagPCAError):
    """A point lies on (or numerically at) the cut locus of the base point."""


class BaseMismatch(FlagPCAError):
    pass


class WrongVariant(FlagPCAError):
    pass


class SingleClass(FlagPCAError):
    pass


class DegenerateShape(FlagPCAError):
    pass


class FormatError(FlagPCAError):
    """Malformed input file."""


class NoConvergenceWarning(UserWarning):
    """An iterative routine hit its iteration cap before meeting its tolerance."""
