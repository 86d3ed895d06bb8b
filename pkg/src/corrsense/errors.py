"""Exception types raised across the package."""


class CorrsenseError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(CorrsenseError, ValueError):
    pass


class DegenerateSpectrum(CorrsenseError, ValueError):
    pass


class BadRange(CorrsenseError, ValueError):
    pass


class OutOfWindow(CorrsenseError, ValueError):
    pass


class StepTooLarge(CorrsenseError, ValueError):
    pass


class NormDrift(CorrsenseError, ArithmeticError):
    pass


class PositivityLoss(CorrsenseError, ArithmeticError):
    pass


class SchemaMismatch(CorrsenseError, ValueError):
    pass


class BadFractions(CorrsenseError, ValueError):
    pass


class EmptySplit(CorrsenseError, ValueError):
    pass


class Divergence(CorrsenseError, ArithmeticError):
    pass


class ConfigError(CorrsenseError, ValueError):
    pass
