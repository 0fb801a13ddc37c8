"""Domain types for the unit-commitment problem instance.

Conventions fixed here and relied on everywhere else: power in MW, energy
costs in currency per MWh, one time step is one hour. A fleet holds J thermal
units whose marginal costs are the inference targets plus (optionally) one
demand-side-management pseudo-unit that can start or stop instantly and ramp
over its full range, guaranteeing feasibility at a high price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import jsonio
from .errors import DimensionMismatch, SchemaMismatch

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class UnitParams:
    """Static physical and cost parameters of one generation unit."""

    name: str
    startup_cost: float
    ramp_up: float
    ramp_down: float
    startup_rate: float
    shutdown_rate: float
    min_up: int
    min_down: int
    gen_max: float
    gen_min: float
    init_on_steps: int = 0
    init_off_steps: int = 0
    init_committed: bool = False
    init_output: float = 0.0
    # (slope, intercept) pairs of the convex piecewise-linear generation cost
    cost_segments: tuple = ((0.0, 0.0),)
    cost_is_theta: bool = False
    is_dsm: bool = False


@dataclass(frozen=True)
class FleetConfig:
    """All known parameters of the fleet plus horizon and reserve policy.

    ``reserve_fraction`` defines the spinning-reserve requirement as
    ``R(t) = reserve_fraction * D(t)``.
    """

    units: tuple
    horizon_T: int = 24
    reserve_fraction: float = 0.0

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def theta_indices(self) -> tuple:
        """Indices of units whose marginal cost is an inference target."""
        return tuple(j for j, u in enumerate(self.units) if u.cost_is_theta)

    @property
    def theta_dim(self) -> int:
        return len(self.theta_indices)


@dataclass(frozen=True, eq=False)
class ThetaVector:
    """Marginal generation costs of the inferable units, in fleet order."""

    costs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.costs, dtype=float)
        if arr.ndim != 1:
            raise DimensionMismatch("theta must be a 1-D vector")
        if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
            raise ValueError("theta entries must be finite and strictly positive")
        arr.flags.writeable = False
        object.__setattr__(self, "costs", arr)

    def __len__(self) -> int:
        return self.costs.shape[0]


@dataclass(frozen=True, eq=False)
class DemandProfile:
    """Demand in MW for each step of the horizon."""

    demand: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.demand, dtype=float)
        if arr.ndim != 1:
            raise DimensionMismatch("demand must be a 1-D vector")
        if not np.all(np.isfinite(arr)) or not np.all(arr >= 0):
            raise ValueError("demand entries must be finite and non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "demand", arr)

    def __len__(self) -> int:
        return self.demand.shape[0]


@dataclass(frozen=True, eq=False)
class Schedule:
    """Solved dispatch: outputs, available headroom, and on/start/stop flags.

    Matrices are (n_units, T). ``g_bar`` is the maximum available power of
    each unit at each step; ``v``, ``y``, ``z`` are 0/1 commitment, startup
    and shutdown indicators.
    """

    g: np.ndarray
    g_bar: np.ndarray
    v: np.ndarray
    y: np.ndarray
    z: np.ndarray
    objective_value: float

    def __post_init__(self):
        for name in ("g", "g_bar", "v", "y", "z"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 2:
                raise DimensionMismatch(f"{name} must be a matrix")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.g.shape != self.v.shape:
            raise DimensionMismatch("g and v shapes differ")
        if not math.isfinite(self.objective_value):
            raise ValueError("objective_value must be finite")


def validate_fleet(cfg: FleetConfig) -> list:
    """Check every structural invariant; return one message per violation."""
    problems = []
    if cfg.n_units < 1:
        problems.append("fleet must contain at least one unit")
    if cfg.horizon_T < 1:
        problems.append("horizon_T must be >= 1")
    if not math.isfinite(cfg.reserve_fraction) or cfg.reserve_fraction < 0:
        problems.append("reserve_fraction must be finite and >= 0")
    dsm_count = sum(1 for u in cfg.units if u.is_dsm)
    if dsm_count > 1:
        problems.append(f"{dsm_count} units flagged is_dsm; at most one allowed")

    for j, u in enumerate(cfg.units):
        where = f"unit {j} ({u.name})"
        numeric = dict(
            startup_cost=u.startup_cost, ramp_up=u.ramp_up, ramp_down=u.ramp_down,
            startup_rate=u.startup_rate, shutdown_rate=u.shutdown_rate,
            gen_max=u.gen_max, gen_min=u.gen_min, init_output=u.init_output,
        )
        bad = [k for k, v in numeric.items() if not math.isfinite(v)]
        if bad:
            problems.append(f"{where}: non-finite fields {bad}")
            continue
        if not 0 <= u.gen_min <= u.gen_max:
            problems.append(f"{where}: requires 0 <= gen_min <= gen_max")
        for k in ("ramp_up", "ramp_down", "startup_rate", "shutdown_rate"):
            if numeric[k] < 0:
                problems.append(f"{where}: {k} must be >= 0")
        if u.min_up < 0 or u.min_down < 0:
            problems.append(f"{where}: min_up/min_down must be >= 0")
        if u.init_on_steps < 0 or u.init_off_steps < 0:
            problems.append(f"{where}: init_on_steps/init_off_steps must be >= 0")
        if u.init_on_steps > 0 and not u.init_committed:
            problems.append(f"{where}: init_on_steps > 0 requires init_committed")
        if u.init_off_steps > 0 and u.init_committed:
            problems.append(f"{where}: init_off_steps > 0 requires not init_committed")
        if u.init_committed:
            if not u.gen_min <= u.init_output <= u.gen_max:
                problems.append(f"{where}: init_output outside [gen_min, gen_max]")
        elif u.init_output != 0.0:
            problems.append(f"{where}: init_output must be 0 when not committed")
        if len(u.cost_segments) < 1:
            problems.append(f"{where}: needs at least one cost segment")
        for s, (slope, intercept) in enumerate(u.cost_segments):
            if not (math.isfinite(slope) and math.isfinite(intercept)):
                problems.append(f"{where}: cost segment {s} not finite")
            elif slope < 0:
                problems.append(f"{where}: cost segment {s} has negative slope")
        if u.cost_is_theta:
            if len(u.cost_segments) != 1 or u.cost_segments[0][1] != 0.0:
                problems.append(
                    f"{where}: cost_is_theta requires a single zero-intercept segment"
                )
    return problems


def check_theta(fleet: FleetConfig, theta: ThetaVector) -> None:
    if len(theta) != fleet.theta_dim:
        raise DimensionMismatch(
            f"theta has {len(theta)} entries, fleet expects {fleet.theta_dim}"
        )


def check_demand(fleet: FleetConfig, demand: DemandProfile) -> None:
    if len(demand) != fleet.horizon_T:
        raise DimensionMismatch(
            f"demand has {len(demand)} steps, fleet horizon is {fleet.horizon_T}"
        )


def effective_segments(fleet: FleetConfig, theta: ThetaVector, j: int) -> tuple:
    """Cost segments of unit ``j`` with theta substituted where applicable."""
    u = fleet.units[j]
    if not u.cost_is_theta:
        return u.cost_segments
    k = fleet.theta_indices.index(j)
    return ((float(theta.costs[k]), 0.0),)


# ---------------------------------------------------------------------------
# serialization

def unit_to_jsonable(u: UnitParams) -> dict:
    return {
        "name": u.name,
        "startup_cost": float(u.startup_cost),
        "ramp_up": float(u.ramp_up),
        "ramp_down": float(u.ramp_down),
        "startup_rate": float(u.startup_rate),
        "shutdown_rate": float(u.shutdown_rate),
        "min_up": int(u.min_up),
        "min_down": int(u.min_down),
        "gen_max": float(u.gen_max),
        "gen_min": float(u.gen_min),
        "init_on_steps": int(u.init_on_steps),
        "init_off_steps": int(u.init_off_steps),
        "init_committed": bool(u.init_committed),
        "init_output": float(u.init_output),
        "cost_segments": [[float(a), float(b)] for a, b in u.cost_segments],
        "cost_is_theta": bool(u.cost_is_theta),
        "is_dsm": bool(u.is_dsm),
    }


def unit_from_jsonable(d: dict) -> UnitParams:
    return UnitParams(
        name=str(d["name"]),
        startup_cost=float(d["startup_cost"]),
        ramp_up=float(d["ramp_up"]),
        ramp_down=float(d["ramp_down"]),
        startup_rate=float(d["startup_rate"]),
        shutdown_rate=float(d["shutdown_rate"]),
        min_up=int(d["min_up"]),
        min_down=int(d["min_down"]),
        gen_max=float(d["gen_max"]),
        gen_min=float(d["gen_min"]),
        init_on_steps=int(d["init_on_steps"]),
        init_off_steps=int(d["init_off_steps"]),
        init_committed=bool(d["init_committed"]),
        init_output=float(d["init_output"]),
        cost_segments=tuple((float(a), float(b)) for a, b in d["cost_segments"]),
        cost_is_theta=bool(d["cost_is_theta"]),
        is_dsm=bool(d["is_dsm"]),
    )


def fleet_to_jsonable(cfg: FleetConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "horizon_T": int(cfg.horizon_T),
        "reserve_fraction": float(cfg.reserve_fraction),
        "units": [unit_to_jsonable(u) for u in cfg.units],
    }


def fleet_from_jsonable(d: dict) -> FleetConfig:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"unsupported fleet schema_version {d.get('schema_version')!r}"
        )
    return FleetConfig(
        units=tuple(unit_from_jsonable(x) for x in d["units"]),
        horizon_T=int(d["horizon_T"]),
        reserve_fraction=float(d["reserve_fraction"]),
    )


def save_fleet(path, cfg: FleetConfig) -> None:
    jsonio.save(path, fleet_to_jsonable(cfg))


def load_fleet(path) -> FleetConfig:
    return fleet_from_jsonable(jsonio.load(path))


def _packaged_config(name: str) -> dict:
    text = resources.files("ucinfer.data").joinpath(name).read_text("utf-8")
    return jsonio.loads(text)


def load_packaged_run_config(name: str = "default_config.json") -> dict:
    """Raw dict of a run configuration shipped with the package."""
    return _packaged_config(name)


def default_fleet() -> FleetConfig:
    """The reference 10-unit fleet: 9 inferable thermal units plus DSM.

    Parameter values are invented defaults modeled on classic 10-unit
    unit-commitment benchmarks; they live in the packaged config file, not in
    code, and nothing downstream depends on the specific numbers.
    """
    return fleet_from_jsonable(_packaged_config("default_config.json")["fleet"])


def desk_fleet() -> FleetConfig:
    """Reduced fleet (3 thermal units + DSM) for desk-scale experiments."""
    return fleet_from_jsonable(_packaged_config("desk_config.json")["fleet"])
