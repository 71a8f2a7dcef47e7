"""Exception hierarchy shared by the analytic, stochastic and CLI layers."""


class LaserNoiseError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""

    exit_code = 3


class ParameterError(LaserNoiseError, ValueError):
    exit_code = 2


class ConfigurationError(LaserNoiseError, ValueError):
    exit_code = 2


class UnsupportedPumpError(ConfigurationError):
    """Jump simulation only knows Poisson (sigma=1) and regular (sigma=0) pumping."""


class BelowTransparencyError(LaserNoiseError, ValueError):
    """omega_R and r are imaginary below the transparency photon number."""


class StabilityError(LaserNoiseError, ArithmeticError):
    pass


class RootNotFoundError(LaserNoiseError, ArithmeticError):
    pass


class DiffusionModelError(LaserNoiseError, ArithmeticError):
    pass


class SizeError(LaserNoiseError, ValueError):
    exit_code = 2


class StatisticalPowerError(LaserNoiseError):
    exit_code = 4
