"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`HolonomyError`.
The two intermediate classes map onto CLI exit codes: configuration and
input problems (:class:`InputError`) exit with 2, numerical failures
(:class:`NumericalError`) exit with 3.
"""


class HolonomyError(Exception):
    pass


class InputError(HolonomyError):
    pass


class NumericalError(HolonomyError):
    pass


# spectra

class NoConvergence(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class NotApplicable(InputError):
    pass


# family definitions

class UnknownBuiltin(InputError):
    pass


class DSLSyntaxError(InputError):
    """Malformed expression. ``line`` and ``column`` are 1-based."""

    def __init__(self, message, line=1, column=1, where=None):
        self.line = line
        self.column = column
        self.where = where
        loc = f"line {line}, column {column}"
        if where:
            loc = f"{where}, {loc}"
        super().__init__(f"{message} ({loc})")


class UnknownIdentifier(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NonFiniteEntry(NumericalError):
    pass


# paths and permutations

class DegenerateSpec(InputError):
    pass


class SizeMismatch(InputError):
    pass


class NotALoop(InputError):
    pass


class BasePointMismatch(InputError):
    pass


# tracking

class OnDiscriminant(NumericalError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class TrackingAmbiguous(NumericalError):
    def __init__(self, message, index=None, t=None):
        self.index = index
        self.t = t
        super().__init__(message)


# cartography

class JacobianDegenerate(NumericalError):
    """Continuation reached a point where the zero set stops being a smooth line.

    ``location`` is the last accepted point, ``points`` the line traced so far.
    """

    def __init__(self, message, location=None, points=None):
        self.location = location
        self.points = points
        super().__init__(message)


class AmbiguousEnclosure(NumericalError):
    pass


# waveguide

class StepTooLarge(NumericalError):
    pass


class PoorFit(NumericalError):
    pass


class ConfigError(InputError):
    pass
