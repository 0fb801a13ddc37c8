import sys

import numpy as np
import pytest

from ucinfer.core import DemandProfile, FleetConfig, ThetaVector, UnitParams


def refsolver_command() -> str:
    """Command template invoking the bundled LP solver as a subprocess."""
    return (
        f"{sys.executable} -m ucinfer.milp.refsolver "
        "{lp_path} {sol_path} --gap {gap}"
    )


def make_unit(
    name="u",
    gen_max=100.0,
    gen_min=0.0,
    ramp=1000.0,
    start_rate=None,
    min_up=0,
    min_down=0,
    startup_cost=0.0,
    committed=False,
    init_output=0.0,
    theta=True,
    slope=25.0,
    dsm=False,
) -> UnitParams:
    rate = start_rate if start_rate is not None else max(gen_max, ramp)
    return UnitParams(
        name=name,
        startup_cost=startup_cost,
        ramp_up=ramp,
        ramp_down=ramp,
        startup_rate=rate,
        shutdown_rate=rate,
        min_up=min_up,
        min_down=min_down,
        gen_max=gen_max,
        gen_min=gen_min,
        init_committed=committed,
        init_output=init_output,
        cost_segments=((slope, 0.0),),
        cost_is_theta=theta,
        is_dsm=dsm,
    )


def random_tiny_instance(rng: np.random.Generator):
    """Random UC instance with at most 2 units and 4 steps.

    Occasionally infeasible by construction; oracle and solver must agree on
    that too.
    """
    n_units = int(rng.integers(1, 3))
    T = int(rng.integers(2, 5))
    units = []
    for j in range(n_units):
        gen_max = float(rng.uniform(50, 150))
        gen_min = float(rng.uniform(0.0, 0.4) * gen_max)
        committed = bool(rng.random() < 0.5)
        g0 = float(rng.uniform(gen_min, gen_max)) if committed else 0.0
        startup = 0.0 if rng.random() < 0.3 else float(rng.uniform(10, 300))
        units.append(UnitParams(
            name=f"r{j}",
            startup_cost=startup,
            ramp_up=float(rng.uniform(0.2, 1.0) * gen_max),
            ramp_down=float(rng.uniform(0.2, 1.0) * gen_max),
            startup_rate=float(rng.uniform(gen_min, gen_max)),
            shutdown_rate=float(rng.uniform(gen_min, gen_max)),
            min_up=int(rng.integers(0, 3)),
            min_down=int(rng.integers(0, 3)),
            gen_max=gen_max,
            gen_min=gen_min,
            init_committed=committed,
            init_output=g0,
            cost_segments=((25.0, 0.0),),
            cost_is_theta=True,
        ))
    fleet = FleetConfig(units=tuple(units), horizon_T=T)
    theta = ThetaVector(rng.uniform(5.0, 30.0, size=n_units))
    capacity = sum(u.gen_max for u in units)
    # a smooth random walk keeps most instances feasible while still
    # producing some genuinely infeasible ones
    level = rng.uniform(0.3, 0.7)
    values = []
    for _ in range(T):
        values.append(level * capacity)
        level = float(np.clip(level + rng.uniform(-0.15, 0.15), 0.1, 0.9))
    demand = DemandProfile(np.asarray(values))
    return fleet, theta, demand


@pytest.fixture
def rng():
    return np.random.default_rng(20240905)
