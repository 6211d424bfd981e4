"""Exception types raised by the numerical routines."""


class GWPError(Exception):
    """Base class for all errors raised by this package."""


class IllConditionedInputError(GWPError, ValueError):
    """A matrix that must be inverted or square-rooted is (numerically) singular."""


class NotPureStateError(GWPError, ValueError):
    """A covariance matrix is not symplectic, so it is not the image of a wave packet."""


class DegenerateActionError(GWPError, ArithmeticError):
    """The denominator of a linear fractional transformation is singular."""


class StepTooLargeError(GWPError, ArithmeticError):
    """An implicit sub-step could not be solved; retry with a smaller time step."""


class SingularUntangleError(GWPError, ZeroDivisionError):
    """The untangling map was applied at zero total mass (alpha == 0)."""


class ConfigError(GWPError, ValueError):
    """Invalid experiment configuration."""
