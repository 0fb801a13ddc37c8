"""Numerical feasibility checks for solved schedules.

Every constraint family of the UC program is re-evaluated against a
Schedule with an absolute tolerance, independently of any solver. Used both
as a post-solve safety net and to audit persisted datasets.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..core import DemandProfile, FleetConfig, Schedule, ThetaVector, check_demand, check_theta
from ..errors import DimensionMismatch

DEFAULT_TOL = 1e-6


class Violation(NamedTuple):
    family: str
    unit: object   # int or None for system-wide rows
    step: object   # int or None
    amount: float


def validate_schedule(
    fleet: FleetConfig,
    theta: ThetaVector,
    demand: DemandProfile,
    schedule: Schedule,
    tol: float = DEFAULT_TOL,
) -> list:
    """Return one Violation per violated (constraint family, unit, step)."""
    check_theta(fleet, theta)
    check_demand(fleet, demand)
    n, T = fleet.n_units, fleet.horizon_T
    g, gb = schedule.g, schedule.g_bar
    v, y, z = schedule.v, schedule.y, schedule.z
    for name, arr in (("g", g), ("g_bar", gb), ("v", v), ("y", y), ("z", z)):
        if arr.shape != (n, T):
            raise DimensionMismatch(f"{name} has shape {arr.shape}, want {(n, T)}")

    out = []

    def flag(family, j, t, amount):
        if amount > tol:
            out.append(Violation(family, j, t, float(amount)))

    d = demand.demand
    for t in range(T):
        flag("demand_balance", None, t, abs(g[:, t].sum() - d[t]))
        flag("reserve", None, t, d[t] * (1.0 + fleet.reserve_fraction) - gb[:, t].sum())

    for j, u in enumerate(fleet.units):
        v0 = 1.0 if u.init_committed else 0.0
        g0 = u.init_output
        gmax, gmin = u.gen_max, u.gen_min
        for t in range(T):
            for name, val in (("v", v[j, t]), ("y", y[j, t]), ("z", z[j, t])):
                flag("binary", j, t, abs(val - round(val)))
            vp = v[j, t - 1] if t > 0 else v0
            gp = g[j, t - 1] if t > 0 else g0
            flag("logic", j, t, abs(vp - v[j, t] + y[j, t] - z[j, t]))
            flag("ramp_up", j, t,
                 g[j, t] - gp - u.ramp_up * vp - u.startup_rate * y[j, t])
            flag("ramp_down", j, t,
                 gp - g[j, t] - u.ramp_down * v[j, t] - u.shutdown_rate * z[j, t])
            flag("gen_min", j, t, gmin * v[j, t] - g[j, t])
            flag("nonnegative", j, t, -g[j, t])
            flag("headroom", j, t, g[j, t] - gb[j, t])
            flag("gen_max", j, t, gb[j, t] - gmax * v[j, t])
            flag("gbar_ramp", j, t,
                 gb[j, t] - gp - u.ramp_up * vp - u.startup_rate * y[j, t])
            z_next = z[j, t + 1] if t + 1 < T else 0.0
            flag("gbar_shutdown", j, t,
                 gb[j, t] - gmax * (v[j, t] - z_next) - u.shutdown_rate * z_next)

        L_j = min(T, u.init_on_steps)
        F_j = min(T, u.init_off_steps)
        if u.min_up >= 1:
            for t in range(L_j, T):
                window = y[j, max(0, t - u.min_up + 1): t + 1].sum()
                flag("min_up", j, t, window - v[j, t])
        if u.min_down >= 1:
            for t in range(F_j, T):
                window = z[j, max(0, t - u.min_down + 1): t + 1].sum()
                flag("min_down", j, t, v[j, t] + window - 1.0)
        for t in range(L_j):
            flag("initial_on", j, t, 1.0 - v[j, t])
        for t in range(F_j):
            flag("initial_off", j, t, v[j, t])
    return out


def commitment_indicators(v: np.ndarray, init_committed) -> tuple:
    """Minimal start/stop indicators consistent with a commitment matrix.

    Inverts the logic equation assuming no same-step start-and-stop pair,
    which is how cost-minimal solutions behave whenever startup costs are
    positive.
    """
    v = np.asarray(v, dtype=float)
    v0 = np.asarray(init_committed, dtype=float).reshape(-1, 1)
    prev = np.hstack([v0, v[:, :-1]])
    delta = v - prev
    y = np.where(delta > 0.5, 1.0, 0.0)
    z = np.where(delta < -0.5, 1.0, 0.0)
    return y, z


def available_power_cap(
    fleet: FleetConfig, g: np.ndarray, v: np.ndarray, y: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """Largest headroom profile consistent with (g, v, y, z).

    Any feasible ``g_bar`` is dominated by this elementwise cap, so checking
    the cap is equivalent to checking that some feasible headroom exists; if
    the cap itself violates ``g_bar >= g`` no feasible headroom existed.
    """
    n, T = g.shape
    gb = np.empty_like(g)
    for j, u in enumerate(fleet.units):
        v0 = 1.0 if u.init_committed else 0.0
        g0 = u.init_output
        for t in range(T):
            vp = v[j, t - 1] if t > 0 else v0
            gp = g[j, t - 1] if t > 0 else g0
            z_next = z[j, t + 1] if t + 1 < T else 0.0
            cap = u.gen_max * v[j, t]
            cap = min(cap, gp + u.ramp_up * vp + u.startup_rate * y[j, t])
            cap = min(cap, u.gen_max * (v[j, t] - z_next) + u.shutdown_rate * z_next)
            gb[j, t] = cap
    return gb
