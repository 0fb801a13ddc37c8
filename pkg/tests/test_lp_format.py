import numpy as np
import pytest

from ucinfer.core import DemandProfile, FleetConfig, ThetaVector
from ucinfer.errors import BackendError
from ucinfer.milp import build_milp
from ucinfer.milp.build import MilpInstance
from ucinfer.milp.lp_format import (
    export_lp,
    parse_lp,
    parse_solution_cbc,
    parse_solution_native,
    solution_from_file,
)
from conftest import make_unit, random_tiny_instance


def empty_instance():
    return MilpInstance(
        names=["x"], lower=np.zeros(1), upper=np.ones(1),
        is_integer=np.zeros(1, bool), objective=np.array([1.0]),
        rows=[], relations=[], rhs=np.zeros(0), variable_index={},
        row_labels=[], n_units=0, horizon=0,
    )


def test_skeleton_sections_present():
    text = export_lp(empty_instance())
    assert "Minimize" in text
    assert text.rstrip().endswith("End")
    assert "Subject To" in text
    assert "Bounds" in text


def test_single_unit_single_step_declares_three_binaries():
    fleet = FleetConfig(
        units=(make_unit(committed=True, init_output=50.0),), horizon_T=1
    )
    inst = build_milp(
        fleet, ThetaVector(np.array([10.0])), DemandProfile(np.array([50.0]))
    )
    text = export_lp(inst)
    section = text.split("Binaries")[1].split("End")[0].split()
    assert sorted(section) == ["v_0_0", "y_0_0", "z_0_0"]


def test_numbers_round_trip_through_17_digits(rng):
    fleet, theta, demand = random_tiny_instance(rng)
    inst = build_milp(fleet, theta, demand)
    prob = parse_lp(export_lp(inst))
    assert set(prob["names"]) == set(inst.names)
    back = {nm: j for j, nm in enumerate(prob["names"])}
    perm = np.array([back[nm] for nm in inst.names])
    np.testing.assert_array_equal(prob["objective"][perm], inst.objective)
    np.testing.assert_array_equal(prob["lower"][perm], inst.lower)
    np.testing.assert_array_equal(prob["upper"][perm], inst.upper)
    np.testing.assert_array_equal(prob["is_binary"][perm], inst.is_integer)

    mine = sorted(
        (rel, rhs, tuple(sorted((inst.names[c], coef) for c, coef in row.items())))
        for row, rel, rhs in zip(inst.rows, inst.relations, inst.rhs)
    )
    parsed = sorted(
        (rel, rhs, tuple(sorted((prob["names"][c], coef) for c, coef in row.items())))
        for row, rel, rhs in zip(prob["rows"], prob["relations"], prob["rhs"])
    )
    assert mine == parsed


def test_native_solution_parser():
    text = "# comment\nstatus optimal\nobjective 12.5\nmip_gap 1e-09\nx_1 3.25\n"
    parsed = parse_solution_native(text)
    assert parsed["status"] == "optimal"
    assert parsed["objective"] == 12.5
    assert parsed["values"] == {"x_1": 3.25}


def test_native_parser_rejects_missing_status():
    with pytest.raises(BackendError):
        parse_solution_native("objective 1.0\n")


def test_cbc_solution_parser():
    text = (
        "Optimal - objective value 1000.00000000\n"
        "      0 g_0_0                 50                      10\n"
        "      1 g_0_1                 50                      10\n"
    )
    parsed = parse_solution_cbc(text)
    assert parsed["status"] == "optimal"
    assert parsed["objective"] == 1000.0
    assert parsed["values"]["g_0_1"] == 50.0

    assert parse_solution_cbc("Infeasible - objective value 0\n")["status"] == \
        "infeasible"
    assert parse_solution_cbc(
        "Stopped on time - objective value 5\n"
    )["status"] == "time_limit"


def test_solution_mapping_back_to_columns():
    fleet = FleetConfig(
        units=(make_unit(committed=True, init_output=50.0),), horizon_T=1
    )
    inst = build_milp(
        fleet, ThetaVector(np.array([10.0])), DemandProfile(np.array([50.0]))
    )
    sol_text = "status optimal\nobjective 500\n" + "\n".join(
        f"{nm} 1" for nm in inst.names
    )
    sol = solution_from_file(inst, sol_text)
    assert sol.is_optimal
    assert np.all(sol.primal == 1.0)

    assert solution_from_file(inst, "status infeasible\n").status == "infeasible"
    with pytest.raises(BackendError):
        solution_from_file(inst, sol_text, solution_format="mystery")
