"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`Pend3dError`.
:class:`NumericalError` marks failures of a computation (the CLI maps these to
exit code 1); :class:`ConfigError` marks bad scenario input.
"""


class Pend3dError(Exception):
    pass


class NumericalError(Pend3dError):
    pass


class ConfigError(Pend3dError):
    pass


# geometry
class NonSkewInput(Pend3dError, ValueError):
    pass


class TooFarFromSO3(NumericalError, ValueError):
    pass


class NotUnit(Pend3dError, ValueError):
    pass


# dynamics
class InvalidBody(Pend3dError, ValueError):
    pass


class NotAxisymmetric(Pend3dError, ValueError):
    pass


# equilibria
class NonDiagonalInertia(Pend3dError, ValueError):
    pass


class UnsortedInertia(Pend3dError, ValueError):
    pass


class SingularAlpha(Pend3dError, ValueError):
    pass


# linearization
class BalancedBody(Pend3dError, ValueError):
    pass


class NotAnEquilibrium(Pend3dError, ValueError):
    pass


# reduction
class InitialMismatch(Pend3dError, ValueError):
    pass


class NotClosed(Pend3dError, ValueError):
    pass


class NotVerticalRotation(NumericalError):
    pass


# integrate
class StepBlowup(NumericalError):
    pass


class EmptySection(NumericalError):
    pass


class NoCrossings(NumericalError):
    pass


# cli
class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ConfigError):
    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class IoError(Pend3dError, OSError):
    pass
