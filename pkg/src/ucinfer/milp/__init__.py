"""Unit-commitment MILP: construction, backends, validation, LP interchange."""

from .backends import (
    EmbeddedBackend,
    ExternalBackend,
    HighsBackend,
    extract_schedule,
    make_backend,
    solve_uc,
)
from .branch_bound import BnbLimits, bnb_solve
from .build import MilpInstance, build_milp
from .solution import MilpSolution
from .validate import (
    Violation,
    available_power_cap,
    commitment_indicators,
    validate_schedule,
)

__all__ = [
    "BnbLimits",
    "EmbeddedBackend",
    "ExternalBackend",
    "HighsBackend",
    "MilpInstance",
    "MilpSolution",
    "Violation",
    "available_power_cap",
    "bnb_solve",
    "build_milp",
    "commitment_indicators",
    "extract_schedule",
    "make_backend",
    "solve_uc",
    "validate_schedule",
]
