"""Common result type for every MILP backend."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
TIME_LIMIT = "time_limit"
BACKEND_ERROR = "backend_error"


@dataclass
class MilpSolution:
    status: str
    primal: np.ndarray | None = None
    objective: float | None = None
    mip_gap: float | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL
