"""Unit-commitment simulation and simulation-based inference of unit costs."""

from .core import (
    DemandProfile,
    FleetConfig,
    Schedule,
    ThetaVector,
    UnitParams,
    default_fleet,
    desk_fleet,
    validate_fleet,
)

__version__ = "0.1.0"

__all__ = [
    "DemandProfile",
    "FleetConfig",
    "Schedule",
    "ThetaVector",
    "UnitParams",
    "default_fleet",
    "desk_fleet",
    "validate_fleet",
    "__version__",
]
