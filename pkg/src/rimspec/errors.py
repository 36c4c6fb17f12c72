"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical or protocol parameter is out of its valid range."""


class GridError(ValueError):
    """A time/lag/frequency grid is malformed or incompatible."""


class EstimationError(ValueError):
    """Estimator inputs are inconsistent (heterogeneous records, bad lags...)."""


class RepairError(ValueError):
    """A masked tensor point cannot be repaired with the available data."""


class ConfigError(Exception):
    """Experiment configuration is invalid (CLI exit code 2)."""
