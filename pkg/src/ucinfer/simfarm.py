"""Dataset generation: sample priors, run the simulator, persist records.

Records are one JSON object per line with 17-significant-digit floats, plus
a sidecar manifest carrying a hash of the generating configuration. Record i
is drawn from an RNG substream derived from (seed, i), so the dataset bytes
are a pure function of (config, seed) regardless of worker count. Timed-out
solves are logged to a skip file and resampled from a fresh substream.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, jsonio
from .core import FleetConfig, fleet_from_jsonable, fleet_to_jsonable
from .errors import (
    BackendError,
    ConfigHashMismatch,
    CorruptFile,
    SchemaMismatch,
    SolverTimeout,
)
from .milp import solve_uc
from .milp.backends import make_backend
from .priors import (
    DemandPriorConfig,
    ThetaPrior,
    demand_prior_from_jsonable,
    demand_prior_to_jsonable,
    sample_demand,
    sample_theta,
    theta_prior_from_jsonable,
    theta_prior_to_jsonable,
)

MANIFEST_SUFFIX = ".manifest.json"
SKIPLOG_SUFFIX = ".skips.log"
DATASET_SCHEMA_VERSION = 1
_MAX_RETRIES = 20


@dataclass(frozen=True)
class Scenario:
    """Everything the simulator needs besides randomness."""

    fleet: FleetConfig
    theta_prior: ThetaPrior
    demand_prior: DemandPriorConfig

    def to_jsonable(self) -> dict:
        return {
            "fleet": fleet_to_jsonable(self.fleet),
            "theta_prior": theta_prior_to_jsonable(self.theta_prior),
            "demand_prior": demand_prior_to_jsonable(self.demand_prior),
        }

    @classmethod
    def from_jsonable(cls, d: dict) -> "Scenario":
        return cls(
            fleet=fleet_from_jsonable(d["fleet"]),
            theta_prior=theta_prior_from_jsonable(d["theta_prior"]),
            demand_prior=demand_prior_from_jsonable(d["demand_prior"]),
        )

    @classmethod
    def from_run_config(cls, cfg: dict) -> "Scenario":
        return cls.from_jsonable(
            {"fleet": cfg["fleet"], "theta_prior": cfg["theta_prior"],
             "demand_prior": cfg["demand_prior"]}
        )

    def config_hash(self) -> str:
        return jsonio.sha256_of(self.to_jsonable())


@dataclass(frozen=True, eq=False)
class SimRecord:
    theta: np.ndarray
    demand: np.ndarray
    g: np.ndarray
    v: np.ndarray
    objective: float
    seed_index: int

    def to_jsonable(self) -> dict:
        return {
            "seed_index": int(self.seed_index),
            "theta": [float(x) for x in self.theta],
            "demand": [float(x) for x in self.demand],
            "g": [[float(x) for x in row] for row in self.g],
            "v": [[int(round(x)) for x in row] for row in self.v],
            "objective": float(self.objective),
        }

    @classmethod
    def from_jsonable(cls, d: dict) -> "SimRecord":
        return cls(
            theta=np.asarray(d["theta"], float),
            demand=np.asarray(d["demand"], float),
            g=np.asarray(d["g"], float),
            v=np.asarray(d["v"], float),
            objective=float(d["objective"]),
            seed_index=int(d["seed_index"]),
        )


def substream(seed: int, index: int, retry: int = 0) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(index, retry))
    )


def simulate_record(
    scenario: Scenario, backend, seed: int, index: int
) -> tuple:
    """Produce record ``index``; returns (record, skipped_attempts)."""
    skipped = []
    for retry in range(_MAX_RETRIES):
        rng = substream(seed, index, retry)
        theta = sample_theta(scenario.theta_prior, rng)
        demand = sample_demand(
            scenario.demand_prior, scenario.fleet.horizon_T, rng
        )
        try:
            schedule = solve_uc(scenario.fleet, theta, demand, backend)
        except SolverTimeout:
            skipped.append((index, retry))
            continue
        record = SimRecord(
            theta=theta.costs, demand=demand.demand, g=schedule.g,
            v=schedule.v, objective=schedule.objective_value,
            seed_index=index,
        )
        return record, skipped
    raise BackendError(
        f"record {index}: {_MAX_RETRIES} consecutive solver timeouts"
    )


_WORKER_STATE: dict = {}


def _worker_init(scenario_json: dict, backend_json: dict, seed: int) -> None:
    _WORKER_STATE["scenario"] = Scenario.from_jsonable(scenario_json)
    _WORKER_STATE["backend"] = make_backend(backend_json)
    _WORKER_STATE["seed"] = seed


def _worker_run(index: int) -> tuple:
    record, skipped = simulate_record(
        _WORKER_STATE["scenario"], _WORKER_STATE["backend"],
        _WORKER_STATE["seed"], index,
    )
    return record.to_jsonable(), skipped


def build_manifest(scenario: Scenario, n: int, seed: int) -> dict:
    return {
        "schema_version": DATASET_SCHEMA_VERSION,
        "kind": "uc-dataset",
        "config_hash": scenario.config_hash(),
        "n_records": int(n),
        "seed": int(seed),
        "generator": f"ucinfer-{__version__}",
    }


def generate_dataset(
    scenario: Scenario,
    n: int,
    seed: int,
    backend_config: dict,
    out_path: str,
    workers: int = 1,
) -> dict:
    """Simulate ``n`` records and write them; returns the manifest."""
    manifest = build_manifest(scenario, n, seed)
    skips = []
    tmp_path = f"{out_path}.partial"
    try:
        with open(tmp_path, "w", encoding="utf-8") as fh:
            if workers <= 1:
                backend = make_backend(backend_config)
                for i in range(n):
                    record, skipped = simulate_record(scenario, backend, seed, i)
                    skips.extend(skipped)
                    fh.write(jsonio.dumps(record.to_jsonable()))
                    fh.write("\n")
            else:
                with ProcessPoolExecutor(
                    max_workers=workers,
                    initializer=_worker_init,
                    initargs=(scenario.to_jsonable(), backend_config, seed),
                ) as pool:
                    for payload, skipped in pool.map(
                        _worker_run, range(n), chunksize=8
                    ):
                        skips.extend(skipped)
                        fh.write(jsonio.dumps(payload))
                        fh.write("\n")
    except Exception:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    os.replace(tmp_path, out_path)
    jsonio.save(manifest_path(out_path), manifest)
    if skips:
        with open(out_path + SKIPLOG_SUFFIX, "w", encoding="utf-8") as fh:
            for index, retry in skips:
                fh.write(f"index={index} retry={retry} reason=timeout\n")
    return manifest


def manifest_path(dataset_path: str) -> str:
    return dataset_path + MANIFEST_SUFFIX


def read_manifest(dataset_path: str) -> dict:
    path = manifest_path(dataset_path)
    if not os.path.exists(path):
        raise CorruptFile(f"missing manifest {path}")
    manifest = jsonio.load(path)
    if manifest.get("schema_version") != DATASET_SCHEMA_VERSION:
        raise SchemaMismatch(
            f"unsupported dataset schema {manifest.get('schema_version')!r}"
        )
    if manifest.get("kind") != "uc-dataset":
        raise SchemaMismatch(f"not a dataset manifest: {manifest.get('kind')!r}")
    return manifest


def read_dataset(dataset_path: str, scenario: Scenario | None = None):
    """Yield SimRecords after manifest validation.

    When ``scenario`` is given, its hash must match the manifest's.
    """
    manifest = read_manifest(dataset_path)
    if scenario is not None:
        expected = scenario.config_hash()
        if manifest["config_hash"] != expected:
            raise ConfigHashMismatch(
                f"dataset was generated under config {manifest['config_hash'][:12]}..., "
                f"expected {expected[:12]}..."
            )
    count = 0
    with open(dataset_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if not line.endswith("\n"):
                raise CorruptFile(f"{dataset_path}: truncated line {lineno}")
            try:
                payload = jsonio.loads(line)
                record = SimRecord.from_jsonable(payload)
            except (ValueError, KeyError, TypeError) as exc:
                raise CorruptFile(
                    f"{dataset_path}: bad record at line {lineno}: {exc}"
                ) from exc
            count += 1
            yield record
    if count != manifest["n_records"]:
        raise CorruptFile(
            f"{dataset_path}: {count} records found, manifest says "
            f"{manifest['n_records']}"
        )


def write_dataset(dataset_path: str, records, manifest: dict) -> None:
    """Write records and manifest; the inverse of read_dataset."""
    n = 0
    tmp_path = f"{dataset_path}.partial"
    with open(tmp_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(jsonio.dumps(record.to_jsonable()))
            fh.write("\n")
            n += 1
    if n != manifest["n_records"]:
        os.unlink(tmp_path)
        raise ValueError(f"manifest says {manifest['n_records']} records, got {n}")
    os.replace(tmp_path, dataset_path)
    jsonio.save(manifest_path(dataset_path), manifest)


def load_dataset_arrays(dataset_path: str, scenario: Scenario | None = None) -> dict:
    """Materialize a dataset into stacked arrays (theta, g, demand, ...)."""
    thetas, demands, gs, vs, objectives = [], [], [], [], []
    for rec in read_dataset(dataset_path, scenario):
        thetas.append(rec.theta)
        demands.append(rec.demand)
        gs.append(rec.g)
        vs.append(rec.v)
        objectives.append(rec.objective)
    return {
        "theta": np.asarray(thetas),
        "demand": np.asarray(demands),
        "g": np.asarray(gs),
        "v": np.asarray(vs),
        "objective": np.asarray(objectives),
    }
