"""Exception types raised across the package."""


class DomainError(ValueError):
    """A closed-form quantity was requested outside its domain of validity."""


class BasisMismatchError(ValueError):
    """A state was handed to an operation expecting the other basis."""


class UnderconstrainedFitError(ValueError):
    """Fewer than two points qualify for an exponential fit."""


class DelocalizedError(ValueError):
    """A momentum profile has no decaying exponential envelope.

    The fitted localization length is infinite; it is stored on the
    exception as ``length``.
    """

    def __init__(self, message: str, slope: float):
        super().__init__(message)
        self.slope = slope
        self.length = float("inf")


class ProfileParseError(ValueError):
    """A hardware profile file is malformed; ``key`` names the culprit."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
