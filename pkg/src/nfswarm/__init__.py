"""Near-field channel modelling and sparse estimation for UAV swarm arrays."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, MemoryBudgetError, RankDeficientError  # noqa: E402
from .geometry import ArrayConfig, reference_config  # noqa: E402

__all__ = ["ArrayConfig", "ConfigError", "DomainError", "MemoryBudgetError",
           "RankDeficientError", "reference_config", "__version__"]
