"""Set-membership filtering on constrained zonotopes."""

from .czono import Box, ConstrainedZonotope, EmptySetError
from .matlib import NumericalFailure
from .sysid import ConfigError, LinearSystem, decompose

__all__ = [
    "Box",
    "ConfigError",
    "ConstrainedZonotope",
    "EmptySetError",
    "LinearSystem",
    "NumericalFailure",
    "decompose",
]
