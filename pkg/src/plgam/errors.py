"""Exception hierarchy shared across the library."""


class PlgamError(Exception):
    """Base class for all library errors."""


class ConfigurationError(PlgamError):
    """Bad configuration: unknown column, invalid hyperparameter, etc."""


class IngestionError(PlgamError):
    """Input file could not be parsed into a dataset."""


class ValidationError(PlgamError):
    """Inputs violate an operation's preconditions."""


class SolverError(PlgamError):
    """Linear system could not be solved (typically singular at lambda=0)."""


class DegenerateFeatureError(ValidationError):
    """Feature column has too few distinct values to build a threshold grid."""


class ModelFormatError(PlgamError):
    """Model payload is corrupt or has an unsupported version."""
