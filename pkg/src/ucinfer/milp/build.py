"""Construction of the unit-commitment mixed-integer linear program.

Per unit j and step t the instance carries continuous output ``g``, available
headroom ``gbar``, a cost epigraph variable ``k`` bounding the convex
piecewise-linear generation cost from above, and binaries ``v`` (on), ``y``
(start), ``z`` (stop). Steps are indexed 0..T-1 internally; references to
step -1 are the initial conditions and fold into constraint right-hand
sides. Columns are laid out block-wise (all g, all gbar, all k, all v, all
y, all z), j-major and t-minor inside each block, so column order - and with
it branching tie-breaks - is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    DemandProfile,
    FleetConfig,
    ThetaVector,
    check_demand,
    check_theta,
    effective_segments,
    validate_fleet,
)
from ..errors import InvalidFleet

VAR_KINDS = ("g", "gbar", "k", "v", "y", "z")
BINARY_KINDS = ("v", "y", "z")

LE, EQ, GE = "<=", "=", ">="


@dataclass
class MilpInstance:
    """A minimization MILP in sparse row form."""

    names: list
    lower: np.ndarray
    upper: np.ndarray
    is_integer: np.ndarray
    objective: np.ndarray
    rows: list            # list of {col: coef}
    relations: list       # "<=", "=", ">=" per row
    rhs: np.ndarray
    variable_index: dict  # (kind, j, t) -> column
    row_labels: list      # (family, j, t); j or t may be None
    n_units: int = 0
    horizon: int = 0

    @property
    def n_cols(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def binary_columns(self) -> np.ndarray:
        return np.flatnonzero(self.is_integer)

    def column(self, kind: str, j: int, t: int) -> int:
        return self.variable_index[(kind, j, t)]

    def check(self) -> list:
        """Structural self-check; returns a list of problem descriptions."""
        problems = []
        if np.any(self.lower > self.upper):
            problems.append("some lower bound exceeds its upper bound")
        for i, row in enumerate(self.rows):
            for col in row:
                if not 0 <= col < self.n_cols:
                    problems.append(f"row {i} references undefined column {col}")
        if np.flatnonzero(self.objective).size and (
            np.flatnonzero(self.objective).max() >= self.n_cols
        ):
            problems.append("objective references undefined columns")
        return problems


def name_of(kind: str, j: int, t: int) -> str:
    return f"{kind}_{j}_{t}"


def build_milp(
    fleet: FleetConfig, theta: ThetaVector, demand: DemandProfile
) -> MilpInstance:
    """Assemble the full MILP for one (fleet, theta, demand) triple."""
    bad = validate_fleet(fleet)
    if bad:
        raise InvalidFleet("; ".join(bad))
    check_theta(fleet, theta)
    check_demand(fleet, demand)

    n, T = fleet.n_units, fleet.horizon_T
    d = demand.demand

    variable_index = {}
    names = []
    for kind in VAR_KINDS:
        for j in range(n):
            for t in range(T):
                variable_index[(kind, j, t)] = len(names)
                names.append(name_of(kind, j, t))
    n_cols = len(names)

    lower = np.zeros(n_cols)
    upper = np.full(n_cols, np.inf)
    is_integer = np.zeros(n_cols, dtype=bool)
    objective = np.zeros(n_cols)

    col = variable_index
    for j, u in enumerate(fleet.units):
        segs = effective_segments(fleet, theta, j)
        # the epigraph floor max_s(alpha*g + beta) never drops below this,
        # so a finite bound is exact and keeps the LP free-variable-free
        k_floor = min(0.0, min(beta for _, beta in segs))
        for t in range(T):
            upper[col[("g", j, t)]] = u.gen_max
            upper[col[("gbar", j, t)]] = u.gen_max
            lower[col[("k", j, t)]] = k_floor
            for kind in BINARY_KINDS:
                c = col[(kind, j, t)]
                upper[c] = 1.0
                is_integer[c] = True
            objective[col[("k", j, t)]] = 1.0
            objective[col[("y", j, t)]] = u.startup_cost

    # force commitment during residual initial min-up / min-down obligations
    for j, u in enumerate(fleet.units):
        L_j = min(T, u.init_on_steps)
        F_j = min(T, u.init_off_steps)
        for t in range(L_j):
            lower[col[("v", j, t)]] = 1.0
        for t in range(F_j):
            upper[col[("v", j, t)]] = 0.0

    rows, relations, rhs, row_labels = [], [], [], []

    def add(row: dict, rel: str, b: float, label: tuple) -> None:
        rows.append(row)
        relations.append(rel)
        rhs.append(float(b))
        row_labels.append(label)

    for t in range(T):
        add({col[("g", j, t)]: 1.0 for j in range(n)}, EQ, d[t],
            ("demand_balance", None, t))
    for t in range(T):
        add({col[("gbar", j, t)]: 1.0 for j in range(n)}, GE,
            d[t] * (1.0 + fleet.reserve_fraction), ("reserve", None, t))

    for j, u in enumerate(fleet.units):
        v0 = 1.0 if u.init_committed else 0.0
        g0 = u.init_output
        segs = effective_segments(fleet, theta, j)
        for t in range(T):
            g_c = col[("g", j, t)]
            gb_c = col[("gbar", j, t)]
            k_c = col[("k", j, t)]
            v_c = col[("v", j, t)]
            y_c = col[("y", j, t)]
            z_c = col[("z", j, t)]

            for s, (alpha, beta) in enumerate(segs):
                add({k_c: 1.0, g_c: -alpha}, GE, beta, ("cost_epigraph", j, t))

            if t == 0:
                add({v_c: -1.0, y_c: 1.0, z_c: -1.0}, EQ, -v0, ("logic", j, t))
                add({g_c: 1.0, y_c: -u.startup_rate}, LE,
                    g0 + u.ramp_up * v0, ("ramp_up", j, t))
                add({g_c: -1.0, v_c: -u.ramp_down, z_c: -u.shutdown_rate}, LE,
                    -g0, ("ramp_down", j, t))
                add({gb_c: 1.0, y_c: -u.startup_rate}, LE,
                    g0 + u.ramp_up * v0, ("gbar_ramp", j, t))
            else:
                vp_c = col[("v", j, t - 1)]
                gp_c = col[("g", j, t - 1)]
                add({vp_c: 1.0, v_c: -1.0, y_c: 1.0, z_c: -1.0}, EQ, 0.0,
                    ("logic", j, t))
                add({g_c: 1.0, gp_c: -1.0, vp_c: -u.ramp_up,
                     y_c: -u.startup_rate}, LE, 0.0, ("ramp_up", j, t))
                add({gp_c: 1.0, g_c: -1.0, v_c: -u.ramp_down,
                     z_c: -u.shutdown_rate}, LE, 0.0, ("ramp_down", j, t))
                add({gb_c: 1.0, gp_c: -1.0, vp_c: -u.ramp_up,
                     y_c: -u.startup_rate}, LE, 0.0, ("gbar_ramp", j, t))

            add({v_c: u.gen_min, g_c: -1.0}, LE, 0.0, ("gen_min", j, t))
            add({g_c: 1.0, gb_c: -1.0}, LE, 0.0, ("headroom", j, t))
            add({gb_c: 1.0, v_c: -u.gen_max}, LE, 0.0, ("gen_max", j, t))

            if t + 1 < T:
                zn_c = col[("z", j, t + 1)]
                add({gb_c: 1.0, v_c: -u.gen_max,
                     zn_c: u.gen_max - u.shutdown_rate}, LE, 0.0,
                    ("gbar_shutdown", j, t))
            else:
                # stop indicators beyond the horizon are treated as zero
                add({gb_c: 1.0, v_c: -u.gen_max}, LE, 0.0,
                    ("gbar_shutdown", j, t))

        L_j = min(T, u.init_on_steps)
        F_j = min(T, u.init_off_steps)
        if u.min_up >= 1:
            for t in range(L_j, T):
                window = range(max(0, t - u.min_up + 1), t + 1)
                row = {col[("y", j, kk)]: 1.0 for kk in window}
                row[col[("v", j, t)]] = row.get(col[("v", j, t)], 0.0) - 1.0
                add(row, LE, 0.0, ("min_up", j, t))
        if u.min_down >= 1:
            for t in range(F_j, T):
                window = range(max(0, t - u.min_down + 1), t + 1)
                row = {col[("z", j, kk)]: 1.0 for kk in window}
                row[col[("v", j, t)]] = row.get(col[("v", j, t)], 0.0) + 1.0
                add(row, LE, 1.0, ("min_down", j, t))

    return MilpInstance(
        names=names,
        lower=lower,
        upper=upper,
        is_integer=is_integer,
        objective=objective,
        rows=rows,
        relations=relations,
        rhs=np.asarray(rhs),
        variable_index=variable_index,
        row_labels=row_labels,
        n_units=n,
        horizon=T,
    )
