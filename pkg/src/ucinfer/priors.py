"""Samplers and densities for the cost prior and the synthetic demand prior.

Costs are uniform on a per-unit box. Demand follows a deterministic daily
shape (a base level plus sinusoidal components giving morning/evening peaks
and a night trough) perturbed by Gaussian noise whose standard deviation is
a fraction of the peak of the deterministic shape; negative draws are
clamped at a configurable floor.

All samplers take an explicit numpy Generator; callers own the streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DemandProfile, ThetaVector
from .errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class ThetaPrior:
    """Independent uniform prior over each unit's marginal cost."""

    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        low = np.asarray(self.low, dtype=float)
        high = np.asarray(self.high, dtype=float)
        if low.shape != high.shape or low.ndim != 1:
            raise DimensionMismatch("low/high must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(low)) and np.all(np.isfinite(high))):
            raise ValueError("prior bounds must be finite")
        if not np.all(low > 0):
            raise ValueError("prior bounds must be strictly positive")
        if not np.all(low < high):
            raise ValueError("low must be strictly below high elementwise")
        low.flags.writeable = False
        high.flags.writeable = False
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def dim(self) -> int:
        return self.low.shape[0]


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float
    period: float
    phase: float


@dataclass(frozen=True)
class DemandPriorConfig:
    base: float
    amplitudes: tuple = ()
    noise_sigma_fraction: float = 0.10
    floor: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.base) and self.base > 0):
            raise ValueError("base demand must be finite and positive")
        if not 0 <= self.noise_sigma_fraction < 1:
            raise ValueError("noise_sigma_fraction must be in [0, 1)")
        for s in self.amplitudes:
            if s.period <= 0:
                raise ValueError("sinusoid periods must be positive")


def sample_theta(prior: ThetaPrior, rng: np.random.Generator) -> ThetaVector:
    u = rng.uniform(size=prior.dim)
    return ThetaVector(prior.low + u * (prior.high - prior.low))


def log_prior_theta(prior: ThetaPrior, theta: ThetaVector) -> float:
    """Log density of the uniform box; -inf outside the support."""
    x = theta.costs
    if x.shape != prior.low.shape:
        raise DimensionMismatch("theta dimension does not match the prior")
    if np.all((x >= prior.low) & (x <= prior.high)):
        return float(-np.log(prior.high - prior.low).sum())
    return -math.inf


def theta_in_support(prior: ThetaPrior, costs: np.ndarray) -> np.ndarray:
    """Vectorized support test for an (n, dim) array of cost vectors."""
    costs = np.atleast_2d(costs)
    return np.all((costs >= prior.low) & (costs <= prior.high), axis=1)


def demand_mean(cfg: DemandPriorConfig, T: int) -> np.ndarray:
    t = np.arange(T, dtype=float)
    mu = np.full(T, cfg.base)
    for s in cfg.amplitudes:
        mu += s.amplitude * np.sin(2.0 * np.pi * t / s.period + s.phase)
    return mu


def sample_demand(
    cfg: DemandPriorConfig, T: int, rng: np.random.Generator
) -> DemandProfile:
    mu = demand_mean(cfg, T)
    peak = float(mu.max())
    sigma = cfg.noise_sigma_fraction * peak
    noise = rng.normal(0.0, sigma, size=T) if sigma > 0 else np.zeros(T)
    return DemandProfile(np.maximum(cfg.floor, mu + noise))


# ---------------------------------------------------------------------------
# configuration plumbing

def theta_prior_from_jsonable(d: dict) -> ThetaPrior:
    return ThetaPrior(low=np.asarray(d["low"], float), high=np.asarray(d["high"], float))


def theta_prior_to_jsonable(p: ThetaPrior) -> dict:
    return {"low": [float(x) for x in p.low], "high": [float(x) for x in p.high]}


def demand_prior_from_jsonable(d: dict) -> DemandPriorConfig:
    return DemandPriorConfig(
        base=float(d["base"]),
        amplitudes=tuple(
            Sinusoid(float(s["amplitude"]), float(s["period"]), float(s["phase"]))
            for s in d.get("amplitudes", ())
        ),
        noise_sigma_fraction=float(d.get("noise_sigma_fraction", 0.10)),
        floor=float(d.get("floor", 0.0)),
    )


def demand_prior_to_jsonable(c: DemandPriorConfig) -> dict:
    return {
        "base": float(c.base),
        "amplitudes": [
            {"amplitude": float(s.amplitude), "period": float(s.period),
             "phase": float(s.phase)}
            for s in c.amplitudes
        ],
        "noise_sigma_fraction": float(c.noise_sigma_fraction),
        "floor": float(c.floor),
    }
