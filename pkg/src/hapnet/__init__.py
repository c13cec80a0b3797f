"""Coverage and capacity of HAP networks sharing spectrum with terrestrial cells."""

from .config import NetworkConfig, parse_config
from .errors import (
    CapabilityError, ConfigError, DegenerateParametrizationError, DomainError,
    HapnetError, InfeasibleError, NumericalError,
)

__version__ = "0.1.0"
