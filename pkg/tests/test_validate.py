import dataclasses

import numpy as np
import pytest

from ucinfer.core import DemandProfile, FleetConfig, Schedule, ThetaVector
from ucinfer.errors import DimensionMismatch
from ucinfer.milp import (
    EmbeddedBackend,
    available_power_cap,
    commitment_indicators,
    solve_uc,
    validate_schedule,
)
from conftest import make_unit, random_tiny_instance


def two_unit_setup():
    units = (
        make_unit(name="a", gen_max=120.0, gen_min=30.0, ramp=40.0,
                  start_rate=60.0, min_up=2, min_down=2, startup_cost=100.0,
                  committed=True, init_output=60.0),
        make_unit(name="b", gen_max=90.0, gen_min=10.0, ramp=30.0,
                  start_rate=50.0, min_up=1, min_down=1, startup_cost=50.0),
    )
    fleet = FleetConfig(units=units, horizon_T=3)
    theta = ThetaVector(np.array([12.0, 20.0]))
    demand = DemandProfile(np.array([70.0, 110.0, 150.0]))
    return fleet, theta, demand


def test_solver_schedules_have_no_violations():
    fleet, theta, demand = two_unit_setup()
    schedule = solve_uc(fleet, theta, demand, EmbeddedBackend(), validate=False)
    assert validate_schedule(fleet, theta, demand, schedule) == []


def test_generation_limit_breach_located():
    fleet, theta, demand = two_unit_setup()
    schedule = solve_uc(fleet, theta, demand, EmbeddedBackend())
    g = schedule.g.copy()
    gb = schedule.g_bar.copy()
    g[0, 0] = fleet.units[0].gen_max + 1.0
    gb[0, 0] = fleet.units[0].gen_max + 1.0
    broken = Schedule(g=g, g_bar=gb, v=schedule.v, y=schedule.y, z=schedule.z,
                      objective_value=schedule.objective_value)
    families = {(v.family, v.unit, v.step)
                for v in validate_schedule(fleet, theta, demand, broken)}
    assert ("gen_max", 0, 0) in families


def test_phantom_startup_flagged_as_logic_violation():
    fleet, theta, demand = two_unit_setup()
    schedule = solve_uc(fleet, theta, demand, EmbeddedBackend())
    y = schedule.y.copy()
    t = 1
    assert schedule.v[0, 0] == 1.0 and schedule.v[0, t] == 1.0
    y[0, t] = 1.0  # start while already running, without a matching stop
    broken = Schedule(g=schedule.g, g_bar=schedule.g_bar, v=schedule.v, y=y,
                      z=schedule.z, objective_value=schedule.objective_value)
    families = {(v.family, v.unit, v.step)
                for v in validate_schedule(fleet, theta, demand, broken)}
    assert ("logic", 0, t) in families


def test_demand_imbalance_detected():
    fleet, theta, demand = two_unit_setup()
    schedule = solve_uc(fleet, theta, demand, EmbeddedBackend())
    g = schedule.g.copy()
    g[0, 2] += 0.5
    broken = Schedule(g=g, g_bar=np.maximum(schedule.g_bar, g), v=schedule.v,
                      y=schedule.y, z=schedule.z,
                      objective_value=schedule.objective_value)
    fams = {v.family for v in validate_schedule(fleet, theta, demand, broken)}
    assert "demand_balance" in fams


def test_min_up_window_violation():
    fleet, theta, demand = two_unit_setup()
    # unit b cycles on at t=1; force it back off at t=2 against min_up
    unit_b = dataclasses.replace(fleet.units[1], min_up=3)
    fleet = FleetConfig(units=(fleet.units[0], unit_b), horizon_T=3)
    v = np.array([[1, 1, 1], [0, 1, 0]], float)
    y, z = commitment_indicators(v, [u.init_committed for u in fleet.units])
    g = np.array([[70.0, 80.0, 120.0], [0.0, 30.0, 0.0]])
    gb = available_power_cap(fleet, g, v, y, z)
    schedule = Schedule(g=g, g_bar=gb, v=v, y=y, z=z, objective_value=0.0)
    demand = DemandProfile(g.sum(axis=0))
    fams = {(viol.family, viol.unit)
            for viol in validate_schedule(fleet, theta, demand, schedule)}
    assert ("min_up", 1) in fams


def test_tolerance_is_absolute_1e_6():
    fleet, theta, demand = two_unit_setup()
    schedule = solve_uc(fleet, theta, demand, EmbeddedBackend())
    g = schedule.g.copy()
    g[0, 0] += 5e-7  # inside tolerance
    ok = Schedule(g=g, g_bar=np.maximum(schedule.g_bar, g), v=schedule.v,
                  y=schedule.y, z=schedule.z,
                  objective_value=schedule.objective_value)
    assert validate_schedule(fleet, theta, demand, ok) == []
    g2 = schedule.g.copy()
    g2[0, 0] += 5e-6  # outside tolerance: demand balance breaks
    bad = Schedule(g=g2, g_bar=np.maximum(schedule.g_bar, g2), v=schedule.v,
                   y=schedule.y, z=schedule.z,
                   objective_value=schedule.objective_value)
    assert validate_schedule(fleet, theta, demand, bad) != []


def test_reconstruction_round_trip_from_persisted_fields(rng):
    for _ in range(10):
        fleet, theta, demand = random_tiny_instance(rng)
        try:
            schedule = solve_uc(fleet, theta, demand, EmbeddedBackend())
        except Exception:
            continue
        y, z = commitment_indicators(
            schedule.v, [u.init_committed for u in fleet.units]
        )
        gb = available_power_cap(fleet, schedule.g, schedule.v, y, z)
        rebuilt = Schedule(g=schedule.g, g_bar=gb, v=schedule.v, y=y, z=z,
                           objective_value=schedule.objective_value)
        assert validate_schedule(fleet, theta, demand, rebuilt) == []


def test_dimension_mismatch_raises():
    fleet, theta, demand = two_unit_setup()
    g = np.zeros((2, 4))
    schedule = Schedule(g=g, g_bar=g, v=g, y=g, z=g, objective_value=0.0)
    with pytest.raises(DimensionMismatch):
        validate_schedule(fleet, theta, demand, schedule)
