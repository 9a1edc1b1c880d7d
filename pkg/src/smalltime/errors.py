"""Exception hierarchy shared by all modules."""


class SmallTimeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SmallTimeError, ValueError):
    """A parameter lies outside its admissible range."""


class DomainError(SmallTimeError, ValueError):
    """A numeric function was called outside its domain."""


class NonIntegrable(SmallTimeError):
    pass


class NotFiniteVariation(SmallTimeError):
    pass


class AsymmetricOneStable(SmallTimeError):
    """alpha = 1 with f+ != f- (or alpha+ != alpha-): no leading constant available."""


class UnsupportedStrike(SmallTimeError):
    pass


class UnsupportedModel(SmallTimeError):
    pass


class UnsupportedExact(SmallTimeError):
    """The jump law has no exact terminal sampler; use path simulation."""


class StepCountTooSmall(SmallTimeError):
    pass


class PriceOutOfRange(SmallTimeError, ValueError):
    pass


class HeavyTailNeedsRobust(SmallTimeError):
    pass


class DegenerateFit(SmallTimeError):
    pass


class ConfigError(SmallTimeError):
    """Invalid configuration document.

    ``pointer`` is a JSON pointer (RFC 6901) to the offending field.
    """

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.reason = message
