"""Exception hierarchy.

Two families matter to callers: :class:`ConfigError` (bad input, CLI exit
code 2) and :class:`NumericalError` (a computation could not finish, CLI exit
code 4).
"""


class KSWaveError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(KSWaveError, ValueError):
    pass


class NumericalError(KSWaveError, ArithmeticError):
    pass


# -- model ------------------------------------------------------------------

class NonPositiveRate(ConfigError):
    pass


class NegativeDiffusion(ConfigError):
    pass


class ChiOutOfRange(ConfigError):
    def __init__(self, v, value, mu):
        self.v = float(v)
        self.value = float(value)
        self.mu = float(mu)
        super().__init__(
            f"chi({self.v:.6g}) = {self.value:.6g} violates 0 <= chi <= mu = {self.mu:.6g}"
        )


# -- spectra ----------------------------------------------------------------

class NoUnstableEigenvalue(NumericalError):
    pass


class MultipleUnstableEigenvalues(NumericalError):
    pass


class InteriorStepFailed(NumericalError):
    pass


class NegativeDiscriminant(ConfigError):
    pass


class ZeroDiffusion(ConfigError):
    pass


# -- regions ----------------------------------------------------------------

class DimensionMismatch(ConfigError):
    pass


class InvalidFace(ConfigError):
    pass


class PointOutsideRegion(ConfigError):
    pass


# -- integrate --------------------------------------------------------------

class IntegrationError(NumericalError):
    """Integration stopped early; the partial trajectory is attached."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepLimitExceeded(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    def __init__(self, message, trajectory=None, last_finite=None, t=None):
        super().__init__(message, trajectory)
        self.last_finite = last_finite
        self.t = t


# -- heteroclinic -----------------------------------------------------------

class BracketInvalid(ConfigError):
    pass


class NotConverged(NumericalError):
    pass


class NormalizationFailed(NumericalError):
    pass


# -- pde --------------------------------------------------------------------

class NoCrossing(NumericalError):
    pass


class InsufficientSamples(ConfigError):
    pass


class GridTooCoarse(ConfigError):
    pass
