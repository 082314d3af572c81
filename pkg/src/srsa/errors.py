"""Exception types raised across the package."""


class SrsaError(Exception):
    """Base class for all package errors."""


class InvalidGame(SrsaError, ValueError):
    pass


class AllZeroMeaningFunction(InvalidGame):
    pass


class NegativeDistortion(SrsaError, ValueError):
    pass


class ContextTooLarge(SrsaError, ValueError):
    pass


class MalformedLine(SrsaError, ValueError):
    def __init__(self, path, lineno, line, reason):
        self.path = path
        self.lineno = lineno
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{lineno}: {reason}: {line!r}")


class UnknownLanguage(SrsaError, KeyError):
    pass


class NoMajorTerms(SrsaError, ValueError):
    pass


class NotAJoint(SrsaError, ValueError):
    pass


class OutsideRange(SrsaError, ValueError):
    pass


class ScheduleEmpty(SrsaError, ValueError):
    pass


class NonFiniteGradient(SrsaError, FloatingPointError):
    pass
