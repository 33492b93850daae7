class BryantLabError(ValueError):
    """Base class for every domain error raised by bryant_lab."""


class PathTooClose(BryantLabError):
    pass


class ZeroDerivative(BryantLabError):
    pass


class NonIntegerExponent(BryantLabError):
    pass


class RadiusConflict(BryantLabError):
    pass


class LogarithmicTerm(BryantLabError):
    """A rational derivative has a nonzero residue, so its primitive is not rational."""


class NotUnimodular(BryantLabError):
    pass


class SingularPoint(BryantLabError):
    pass


class StepSizeUnderflow(BryantLabError):
    pass


class LoopPlanningFailed(BryantLabError):
    pass


class DegenerateDifferential(BryantLabError):
    pass


class NotDualizable(BryantLabError):
    pass


class BadParameter(BryantLabError):
    pass


class Inadmissible(BryantLabError):
    pass


class UnknownFamily(BryantLabError):
    pass


class DivergentEnd(BryantLabError):
    pass


class InvalidDivisor(BryantLabError):
    pass


class ConstantMap(BryantLabError):
    pass


class IrregularSingularPoint(BryantLabError):
    pass


class UnsupportedBound(BryantLabError):
    pass


class GridTooCoarse(BryantLabError):
    pass


class NoRootInBracket(BryantLabError):
    pass


class PeriodOpen(BryantLabError):
    pass
