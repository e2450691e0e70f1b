"""Exception types shared across the package."""


class FgModelError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FgModelError):
    """Invalid parameter set, spike schedule, or CLI configuration."""


class ModelRangeError(FgModelError):
    """The model left its validity range (exponent overflow, runaway feedback)."""


class FitError(FgModelError):
    """Exponential window fit could not be performed on the given points."""


class CalibrationError(FgModelError):
    """Window calibration failed to bracket a target or to converge."""
