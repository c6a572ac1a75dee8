"""Exception taxonomy shared across the package.

The three concrete categories map onto the CLI exit codes:
configuration errors (1), input/data errors (2), numerical errors (3).
"""


class TruthvalError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(TruthvalError):
    """Invalid parameters, mismatched components, or a bad experiment config."""


class UnsupportedConfigurationError(ConfigurationError):
    """A well-formed request that this implementation deliberately rejects."""


class InputError(TruthvalError):
    """Malformed user data: bad shapes, parse failures, out-of-domain values."""


class NumericalError(TruthvalError):
    """Numerical failure, e.g. a covariance that cannot be factorized."""
