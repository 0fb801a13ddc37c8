import json

import numpy as np
import pytest

from ucinfer.core import FleetConfig
from ucinfer.errors import ConfigHashMismatch, CorruptFile
from ucinfer.priors import DemandPriorConfig, Sinusoid, ThetaPrior
from ucinfer.simfarm import (
    Scenario,
    SimRecord,
    build_manifest,
    generate_dataset,
    read_dataset,
    write_dataset,
)
from conftest import make_unit


def tiny_scenario(T=6):
    units = (
        make_unit(name="a", gen_max=120.0, gen_min=30.0, ramp=50.0,
                  start_rate=60.0, min_up=2, min_down=2, startup_cost=100.0,
                  committed=True, init_output=60.0),
        make_unit(name="b", gen_max=90.0, gen_min=10.0, ramp=40.0,
                  start_rate=50.0, min_up=1, min_down=1, startup_cost=50.0),
        make_unit(name="dsm", gen_max=80.0, gen_min=0.0, ramp=80.0,
                  start_rate=80.0, startup_cost=500.0, theta=False,
                  slope=120.0, dsm=True),
    )
    fleet = FleetConfig(units=units, horizon_T=T)
    prior = ThetaPrior(low=np.array([10.0, 10.0]), high=np.array([40.0, 40.0]))
    demand = DemandPriorConfig(
        base=120.0, amplitudes=(Sinusoid(40.0, float(T), -1.57),),
        noise_sigma_fraction=0.1,
    )
    return Scenario(fleet=fleet, theta_prior=prior, demand_prior=demand)


BACKEND = {"kind": "highs", "mip_gap": 1e-6}


def test_worker_count_does_not_change_bytes(tmp_path):
    scenario = tiny_scenario()
    p1, p2 = tmp_path / "w1.jsonl", tmp_path / "w4.jsonl"
    generate_dataset(scenario, 6, seed=42, backend_config=BACKEND,
                     out_path=str(p1), workers=1)
    generate_dataset(scenario, 6, seed=42, backend_config=BACKEND,
                     out_path=str(p2), workers=4)
    assert p1.read_bytes() == p2.read_bytes()
    assert (tmp_path / "w1.jsonl.manifest.json").read_bytes() == \
        (tmp_path / "w4.jsonl.manifest.json").read_bytes()


def test_round_trip_is_field_identical(tmp_path):
    scenario = tiny_scenario()
    path = tmp_path / "data.jsonl"
    generate_dataset(scenario, 3, seed=1, backend_config=BACKEND,
                     out_path=str(path))
    records = list(read_dataset(str(path), scenario))
    copy = tmp_path / "copy.jsonl"
    write_dataset(str(copy), records, build_manifest(scenario, 3, seed=1))
    again = list(read_dataset(str(copy), scenario))
    for a, b in zip(records, again):
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.demand, b.demand)
        np.testing.assert_array_equal(a.g, b.g)
        np.testing.assert_array_equal(a.v, b.v)
        assert a.objective == b.objective
        assert a.seed_index == b.seed_index
    assert path.read_bytes() == copy.read_bytes()


def test_empty_dataset_is_valid(tmp_path):
    scenario = tiny_scenario()
    path = tmp_path / "empty.jsonl"
    manifest = generate_dataset(scenario, 0, seed=5, backend_config=BACKEND,
                                out_path=str(path))
    assert manifest["n_records"] == 0
    assert list(read_dataset(str(path), scenario)) == []


def test_truncated_file_detected(tmp_path):
    scenario = tiny_scenario()
    path = tmp_path / "data.jsonl"
    generate_dataset(scenario, 3, seed=1, backend_config=BACKEND,
                     out_path=str(path))
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(CorruptFile):
        list(read_dataset(str(path), scenario))


def test_wrong_config_hash_rejected(tmp_path):
    scenario = tiny_scenario()
    path = tmp_path / "data.jsonl"
    generate_dataset(scenario, 2, seed=1, backend_config=BACKEND,
                     out_path=str(path))
    other = tiny_scenario(T=5)
    with pytest.raises(ConfigHashMismatch):
        list(read_dataset(str(path), other))


def test_missing_manifest_detected(tmp_path):
    scenario = tiny_scenario()
    path = tmp_path / "data.jsonl"
    generate_dataset(scenario, 1, seed=1, backend_config=BACKEND,
                     out_path=str(path))
    (tmp_path / "data.jsonl.manifest.json").unlink()
    with pytest.raises(CorruptFile):
        list(read_dataset(str(path), scenario))


def test_records_reproducible_from_seed_index(tmp_path):
    scenario = tiny_scenario()
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    generate_dataset(scenario, 4, seed=9, backend_config=BACKEND, out_path=str(p1))
    generate_dataset(scenario, 4, seed=9, backend_config=BACKEND, out_path=str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_record_jsonable_round_trip():
    rec = SimRecord(
        theta=np.array([1.0 / 3.0, 2.0]), demand=np.array([5.0, 6.0]),
        g=np.array([[1.0, 2.0], [3.0, 4.0]]), v=np.array([[1.0, 0.0], [1.0, 1.0]]),
        objective=123.456, seed_index=7,
    )
    back = SimRecord.from_jsonable(json.loads(json.dumps(rec.to_jsonable())))
    np.testing.assert_array_equal(back.theta, rec.theta)
    np.testing.assert_array_equal(back.v, rec.v)
    assert back.objective == rec.objective


def test_timeouts_are_logged_and_resampled(tmp_path):
    from ucinfer.milp import HighsBackend
    from ucinfer.milp.solution import MilpSolution, OPTIMAL, TIME_LIMIT
    from ucinfer.simfarm import simulate_record

    scenario = tiny_scenario()

    class FlakyBackend:
        def __init__(self):
            self.inner = HighsBackend()
            self.calls = 0

        def solve(self, instance):
            self.calls += 1
            if self.calls == 1:
                return MilpSolution(TIME_LIMIT)
            return self.inner.solve(instance)

    record, skipped = simulate_record(scenario, FlakyBackend(), seed=3, index=0)
    assert skipped == [(0, 0)]
    assert record.seed_index == 0
    # the retry draws a fresh substream, not the timed-out one
    clean, none_skipped = simulate_record(scenario, HighsBackend(), seed=3,
                                          index=0)
    assert none_skipped == []
    assert not np.array_equal(record.theta, clean.theta)
