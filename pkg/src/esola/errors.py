"""Exception hierarchy shared by every module in the package."""


class EsolaError(Exception):
    """Base class for all errors raised by this package."""


class MalformedContainer(EsolaError, ValueError):
    pass


class UnsupportedFormat(EsolaError, ValueError):
    pass


class EmptyAudio(EsolaError, ValueError):
    pass


class IoFailure(EsolaError, OSError):
    pass


class SignalTooShort(EsolaError, ValueError):
    pass


class NoPeriodicityFound(EsolaError, ValueError):
    pass


class WindowTooLarge(EsolaError, ValueError):
    pass


class LengthMismatch(EsolaError, ValueError):
    pass


class RateMismatch(EsolaError, ValueError):
    pass


class MalformedMarksFile(EsolaError, ValueError):
    pass


class InputTooShort(EsolaError, ValueError):
    pass


class MarksMismatch(EsolaError, ValueError):
    pass


class OutOfBounds(EsolaError, IndexError):
    pass


class EmptySchedule(EsolaError, ValueError):
    pass


class UnsortedSchedule(EsolaError, ValueError):
    pass


class RatioOutOfRange(EsolaError, ValueError):
    pass
