"""MILP backends and the schedule-producing solve entry point.

Three interchangeable backends sit behind one ``solve(instance)`` method:

* ``EmbeddedBackend`` - the exact branch-and-bound reference, for small
  instances only.
* ``HighsBackend`` - HiGHS through scipy, the in-process workhorse for
  fleet-scale simulation.
* ``ExternalBackend`` - any solver executable reachable through a command
  template, bridged by LP files (see lp_format).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp as scipy_milp

from ..core import DemandProfile, FleetConfig, Schedule, ThetaVector
from ..errors import BackendError, Infeasible, SolverTimeout
from .branch_bound import BnbLimits, bnb_solve
from .build import MilpInstance, build_milp
from .solution import BACKEND_ERROR, INFEASIBLE, OPTIMAL, TIME_LIMIT, MilpSolution
from .validate import validate_schedule

BINARY_ROUND_TOL = 1e-6
DEFAULT_MIP_GAP = 1e-6


class EmbeddedBackend:
    """Exact reference solver; raises TooManyBinaries beyond its cap."""

    def __init__(self, binary_cap: int = 60, node_limit: int = 200_000):
        self.limits = BnbLimits(binary_cap=binary_cap, node_limit=node_limit)

    def solve(self, instance: MilpInstance) -> MilpSolution:
        return bnb_solve(instance, self.limits)


class HighsBackend:
    """HiGHS via scipy.optimize.milp, run in-process."""

    def __init__(self, mip_gap: float = DEFAULT_MIP_GAP, time_limit: float | None = None):
        self.mip_gap = mip_gap
        self.time_limit = time_limit

    def solve(self, instance: MilpInstance) -> MilpSolution:
        n = instance.n_cols
        data, indices, indptr = [], [], [0]
        lb_rows, ub_rows = [], []
        for row, rel, b in zip(instance.rows, instance.relations, instance.rhs):
            for col, coef in row.items():
                indices.append(col)
                data.append(coef)
            indptr.append(len(indices))
            if rel == "<=":
                lb_rows.append(-np.inf)
                ub_rows.append(b)
            elif rel == ">=":
                lb_rows.append(b)
                ub_rows.append(np.inf)
            else:
                lb_rows.append(b)
                ub_rows.append(b)
        mat = sparse.csr_matrix(
            (data, indices, indptr), shape=(instance.n_rows, n)
        )
        options = {"mip_rel_gap": self.mip_gap, "presolve": True}
        if self.time_limit is not None:
            options["time_limit"] = self.time_limit
        res = scipy_milp(
            c=instance.objective,
            constraints=LinearConstraint(mat, lb_rows, ub_rows),
            integrality=instance.is_integer.astype(int),
            bounds=Bounds(instance.lower, instance.upper),
            options=options,
        )
        if res.status == 0:
            gap = res.mip_gap if res.mip_gap is not None else 0.0
            return MilpSolution(OPTIMAL, primal=res.x, objective=float(res.fun),
                                mip_gap=float(gap))
        if res.status == 2:
            return MilpSolution(INFEASIBLE)
        if res.status == 1:
            return MilpSolution(TIME_LIMIT)
        return MilpSolution(BACKEND_ERROR)


@dataclass
class ExternalBackend:
    """Subprocess bridge to an external solver executable.

    ``command`` is a template with {lp_path}, {sol_path}, {gap} and
    {time_limit} placeholders; see lp_format.external_solve.
    """

    command: str
    mip_gap: float = DEFAULT_MIP_GAP
    time_limit: float | None = None
    solution_format: str = "native"

    def solve(self, instance: MilpInstance) -> MilpSolution:
        from .lp_format import external_solve

        return external_solve(
            instance, self.command, mip_gap=self.mip_gap,
            time_limit=self.time_limit, solution_format=self.solution_format,
        )


SOLVER_CMD_ENV = "UCINFER_SOLVER_CMD"


def make_backend(config: dict):
    """Build a backend from its JSON configuration section.

    The environment variable UCINFER_SOLVER_CMD overrides the external
    command template when set.
    """
    import os

    kind = config.get("kind", "highs")
    gap = float(config.get("mip_gap", DEFAULT_MIP_GAP))
    time_limit = config.get("time_limit")
    time_limit = None if time_limit is None else float(time_limit)
    if kind == "embedded":
        return EmbeddedBackend(
            binary_cap=int(config.get("binary_cap", 60)),
            node_limit=int(config.get("node_limit", 200_000)),
        )
    if kind == "highs":
        return HighsBackend(mip_gap=gap, time_limit=time_limit)
    if kind == "external":
        command = os.environ.get(SOLVER_CMD_ENV) or config.get("command")
        if not command:
            raise BackendError(
                "external backend needs a command template "
                f"(config key 'command' or ${SOLVER_CMD_ENV})"
            )
        return ExternalBackend(command=command, mip_gap=gap, time_limit=time_limit)
    raise BackendError(f"unknown backend kind {kind!r}")


def extract_schedule(instance: MilpInstance, solution: MilpSolution) -> Schedule:
    """Read the variable blocks of an optimal solution into a Schedule."""
    if not solution.is_optimal:
        raise BackendError(f"cannot extract schedule from status {solution.status}")
    x = solution.primal
    if x is None or len(x) != instance.n_cols:
        raise BackendError("solution primal vector missing or wrong length")
    n, T = instance.n_units, instance.horizon

    def block(kind):
        cols = [[instance.column(kind, j, t) for t in range(T)] for j in range(n)]
        return x[np.asarray(cols)]

    g = np.maximum(block("g"), 0.0)
    gb = np.maximum(block("gbar"), 0.0)
    binaries = {}
    for kind in ("v", "y", "z"):
        raw = block(kind)
        rounded = np.round(raw)
        drift = np.abs(raw - rounded).max() if raw.size else 0.0
        if drift > BINARY_ROUND_TOL:
            raise BackendError(
                f"binary variable {kind} is {drift:.2e} away from integrality"
            )
        binaries[kind] = rounded
    return Schedule(
        g=g, g_bar=gb, v=binaries["v"], y=binaries["y"], z=binaries["z"],
        objective_value=float(solution.objective),
    )


def solve_uc(
    fleet: FleetConfig,
    theta: ThetaVector,
    demand: DemandProfile,
    backend,
    validate: bool = True,
) -> Schedule:
    """Run the simulator f: build the MILP, solve it, return the schedule."""
    instance = build_milp(fleet, theta, demand)
    solution = backend.solve(instance)
    if solution.status == INFEASIBLE:
        raise Infeasible(
            "UC instance is infeasible; check fleet capacity against demand"
        )
    if solution.status == TIME_LIMIT:
        raise SolverTimeout("backend hit its time limit")
    if solution.status != OPTIMAL:
        raise BackendError(f"backend returned status {solution.status}")
    schedule = extract_schedule(instance, solution)
    if validate:
        bad = validate_schedule(fleet, theta, demand, schedule)
        if bad:
            raise BackendError(
                f"solver returned an infeasible schedule: {bad[:3]}..."
            )
    return schedule
