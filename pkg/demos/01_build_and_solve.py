"""Build a small unit-commitment instance and solve it three ways.

Walks through the core objects: a fleet of units, the unknown marginal
costs, a demand profile, the MILP built from them, and the solved schedule.
All three backends must agree on the optimal cost.
"""

import sys

import numpy as np

from ucinfer.core import DemandProfile, FleetConfig, ThetaVector, UnitParams
from ucinfer.milp import (
    EmbeddedBackend,
    ExternalBackend,
    HighsBackend,
    build_milp,
    solve_uc,
    validate_schedule,
)

coal = UnitParams(
    name="coal", startup_cost=400.0, ramp_up=60.0, ramp_down=60.0,
    startup_rate=80.0, shutdown_rate=80.0, min_up=3, min_down=3,
    gen_max=200.0, gen_min=60.0, init_committed=True, init_output=100.0,
    cost_segments=((25.0, 0.0),), cost_is_theta=True,
)
gas = UnitParams(
    name="gas", startup_cost=120.0, ramp_up=80.0, ramp_down=80.0,
    startup_rate=100.0, shutdown_rate=100.0, min_up=1, min_down=1,
    gen_max=120.0, gen_min=20.0, cost_segments=((25.0, 0.0),),
    cost_is_theta=True,
)
fleet = FleetConfig(units=(coal, gas), horizon_T=8)

theta = ThetaVector(np.array([14.0, 32.0]))  # coal cheap, gas dear
demand = DemandProfile(np.array([120, 150, 200, 260, 280, 240, 180, 140.0]))

instance = build_milp(fleet, theta, demand)
print(f"instance: {instance.n_cols} columns ({instance.binary_columns.size} "
      f"binary), {instance.n_rows} rows")

backends = {
    "embedded branch-and-bound": EmbeddedBackend(),
    "HiGHS (in-process)": HighsBackend(),
    "external (bundled reference solver)": ExternalBackend(
        command=f"{sys.executable} -m ucinfer.milp.refsolver "
                "{lp_path} {sol_path} --gap {gap}"
    ),
}
for name, backend in backends.items():
    schedule = solve_uc(fleet, theta, demand, backend)
    print(f"{name:38s} objective = {schedule.objective_value:12.4f}")

schedule = solve_uc(fleet, theta, demand, HighsBackend())
print("\ncommitment (coal, gas):")
for j, unit in enumerate(fleet.units):
    row = "".join("#" if schedule.v[j, t] else "." for t in range(fleet.horizon_T))
    print(f"  {unit.name:5s} {row}")
print("\ndispatch [MW]:")
print(np.round(schedule.g, 1))
print("\nviolations:", validate_schedule(fleet, theta, demand, schedule))
