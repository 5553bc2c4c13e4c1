"""Exception hierarchy shared across the package."""


class ChainShapError(Exception):
    """Base class for all errors raised by this package."""


class GraphValidationError(ChainShapError):
    """A chain graph specification is structurally invalid."""


class ModelFitError(ChainShapError):
    """The observational distribution could not be fitted from the data."""


class SingularConditioningError(ChainShapError):
    """A Gaussian conditioning block is singular (even after regularization)."""


class ZeroProbabilityError(ChainShapError):
    """A discrete conditioning event has probability zero."""


class EnumerationCapError(ChainShapError):
    """Exact permutation enumeration was requested above the feature cap."""


class PredictorError(ChainShapError):
    """The external predictor process violated the wire protocol or failed."""


class ConfigError(ChainShapError):
    """A run configuration file or CLI flag combination is invalid."""
