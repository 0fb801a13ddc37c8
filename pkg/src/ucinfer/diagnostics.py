"""Posterior assessment: expected coverage, predictive checks, corner data.

Coverage uses the rank statistic of the true parameter's density among M
posterior draws: the point lies inside the highest-density region of mass
``1 - alpha`` exactly when the fraction of draws with strictly higher
density is below ``1 - alpha``. Ranks are computed once per test pair and
reused across credibility levels, which makes the empirical curve monotone
by construction.

Any object with ``sample(context, n, rng)`` and ``log_prob(theta, context)``
works as the posterior; the flow model is one such object, and analytic
posteriors substitute for it in calibration oracles.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DemandProfile, FleetConfig, ThetaVector
from .errors import NonFiniteDensity, RejectionRateTooHigh
from .milp import solve_uc
from .npe import build_context
from .priors import ThetaPrior, theta_in_support

DEFAULT_LEVELS = np.linspace(0.05, 0.95, 19)
DEFAULT_COVERAGE_SAMPLES = 1024
# central-interval band masses: the 1/2/3-sigma Gaussian conventions
BAND_MASSES = (0.687, 0.955, 0.997)


def hpd_rank(model, theta_star, context, M: int, rng) -> float:
    """Fraction of M posterior draws with strictly higher density."""
    samples = model.sample(context, M, rng)
    lp_samples = np.asarray(model.log_prob(samples, context))
    lp_star = model.log_prob(np.asarray(theta_star, float), context)
    if not (np.all(np.isfinite(lp_samples)) and np.isfinite(lp_star)):
        raise NonFiniteDensity("posterior density evaluated to NaN/inf")
    return float(np.mean(lp_samples > lp_star))


def hpd_contains(model, theta_star, context, M: int, alpha: float, rng) -> bool:
    """True iff theta_star lies in the estimated 1-alpha HPD region."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if M < 1:
        raise ValueError("M must be >= 1")
    return hpd_rank(model, theta_star, context, M, rng) < 1.0 - alpha


@dataclass
class CoverageCurve:
    levels: np.ndarray
    coverage: np.ndarray
    half_width: np.ndarray
    n_pairs: int
    samples_per_pair: int

    @property
    def ci_low(self) -> np.ndarray:
        return np.maximum(0.0, self.coverage - self.half_width)

    @property
    def ci_high(self) -> np.ndarray:
        return np.minimum(1.0, self.coverage + self.half_width)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "coverage", "ci_low", "ci_high"])
            for lv, cov, lo, hi in zip(
                self.levels, self.coverage, self.ci_low, self.ci_high
            ):
                writer.writerow(
                    [f"{lv:.17g}", f"{cov:.17g}", f"{lo:.17g}", f"{hi:.17g}"]
                )


def expected_coverage(
    model,
    theta_pairs: np.ndarray,
    context_pairs: np.ndarray,
    levels=None,
    M: int = DEFAULT_COVERAGE_SAMPLES,
    rng: np.random.Generator | None = None,
) -> CoverageCurve:
    """Empirical coverage of HPD regions over joint-draw test pairs."""
    rng = rng or np.random.default_rng(0)
    levels = DEFAULT_LEVELS if levels is None else np.asarray(levels, float)
    if np.any(levels <= 0) or np.any(levels >= 1) or np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly increasing within (0, 1)")
    theta_pairs = np.atleast_2d(np.asarray(theta_pairs, float))
    context_pairs = np.atleast_2d(np.asarray(context_pairs, float))
    n = theta_pairs.shape[0]
    ranks = np.empty(n)
    for i in range(n):
        ranks[i] = hpd_rank(model, theta_pairs[i], context_pairs[i], M, rng)
    coverage = np.array([np.mean(ranks < lv) for lv in levels])
    half = 1.96 * np.sqrt(coverage * (1.0 - coverage) / n)
    return CoverageCurve(
        levels=levels, coverage=coverage, half_width=half,
        n_pairs=n, samples_per_pair=M,
    )


# ---------------------------------------------------------------------------
# posterior predictive checks

@dataclass
class PpcBands:
    """Per-unit, per-step central bands of the posterior predictive dispatch."""

    q_low: dict          # band mass -> (n_units, T) lower quantile
    q_high: dict         # band mass -> (n_units, T) upper quantile
    mean: np.ndarray
    median: np.ndarray
    g_true: np.ndarray
    n_samples: int
    n_rejected: int

    def to_csv(self, path) -> None:
        m1, m2, m3 = BAND_MASSES
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["unit", "t", "q_lo_3s", "q_lo_2s", "q_lo_1s", "median",
                 "mean", "q_hi_1s", "q_hi_2s", "q_hi_3s", "g_true"]
            )
            n_units, T = self.g_true.shape
            for j in range(n_units):
                for t in range(T):
                    writer.writerow([
                        j, t,
                        f"{self.q_low[m3][j, t]:.17g}",
                        f"{self.q_low[m2][j, t]:.17g}",
                        f"{self.q_low[m1][j, t]:.17g}",
                        f"{self.median[j, t]:.17g}",
                        f"{self.mean[j, t]:.17g}",
                        f"{self.q_high[m1][j, t]:.17g}",
                        f"{self.q_high[m2][j, t]:.17g}",
                        f"{self.q_high[m3][j, t]:.17g}",
                        f"{self.g_true[j, t]:.17g}",
                    ])


def sample_in_prior(
    model, context, n: int, prior: ThetaPrior | None, rng,
    max_rejection_rate: float = 0.5,
) -> tuple:
    """Draw n posterior samples inside the prior box; returns (thetas, rejected)."""
    if prior is None:
        return model.sample(context, n, rng), 0
    accepted = []
    total_drawn = 0
    total_kept = 0
    while total_kept < n:
        want = n - total_kept
        draw = model.sample(context, max(want, 64), rng)
        keep = draw[theta_in_support(prior, draw)]
        total_drawn += draw.shape[0]
        total_kept += keep.shape[0]
        accepted.append(keep)
        if total_drawn >= max(2 * n, 128):
            rate = 1.0 - total_kept / total_drawn
            if rate > max_rejection_rate:
                raise RejectionRateTooHigh(
                    f"{rate:.0%} of posterior samples fall outside the prior"
                )
    thetas = np.concatenate(accepted, axis=0)[:n]
    return thetas, total_drawn - total_kept


_PPC_STATE: dict = {}


def _ppc_init(fleet, demand_values, backend):
    _PPC_STATE["fleet"] = fleet
    _PPC_STATE["demand"] = DemandProfile(np.asarray(demand_values, float))
    _PPC_STATE["backend"] = backend


def _ppc_solve(theta_values) -> np.ndarray:
    schedule = solve_uc(
        _PPC_STATE["fleet"], ThetaVector(np.asarray(theta_values, float)),
        _PPC_STATE["demand"], _PPC_STATE["backend"],
    )
    return schedule.g


def ppc(
    model,
    fleet: FleetConfig,
    theta_star: ThetaVector | None,
    delta_star: DemandProfile,
    n_samples: int,
    backend,
    rng: np.random.Generator,
    prior: ThetaPrior | None = None,
    g_star: np.ndarray | None = None,
    theta_samples: np.ndarray | None = None,
    workers: int = 1,
) -> PpcBands:
    """Push posterior draws through the simulator and band the dispatches.

    The reference dispatch ``g_star`` is solved from ``theta_star`` unless
    given directly (an observed schedule). ``theta_samples`` bypasses
    posterior sampling (used by degenerate-input tests); otherwise draws
    come from the model conditioned on the observed schedule, rejecting
    those outside the prior box.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if g_star is None:
        if theta_star is None:
            raise ValueError("need theta_star or g_star")
        g_star = solve_uc(fleet, theta_star, delta_star, backend).g
    g_star = np.asarray(g_star, float)
    context = build_context(g_star, delta_star.demand)

    rejected = 0
    if theta_samples is None:
        theta_samples, rejected = sample_in_prior(
            model, context, n_samples, prior, rng
        )
    theta_samples = np.atleast_2d(np.asarray(theta_samples, float))

    if workers <= 1:
        dispatches = [
            _g_for_theta(fleet, row, delta_star, backend)
            for row in theta_samples
        ]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_ppc_init,
            initargs=(fleet, delta_star.demand, backend),
        ) as pool:
            dispatches = list(
                pool.map(_ppc_solve, [row for row in theta_samples], chunksize=4)
            )
    stack = np.stack(dispatches, axis=0)  # (n, units, T)

    q_low, q_high = {}, {}
    for mass in BAND_MASSES:
        lo = (1.0 - mass) / 2.0
        q_low[mass] = np.quantile(stack, lo, axis=0)
        q_high[mass] = np.quantile(stack, 1.0 - lo, axis=0)
    return PpcBands(
        q_low=q_low, q_high=q_high,
        mean=stack.mean(axis=0), median=np.median(stack, axis=0),
        g_true=g_star, n_samples=stack.shape[0], n_rejected=rejected,
    )


def _g_for_theta(fleet, theta_values, demand, backend) -> np.ndarray:
    return solve_uc(
        fleet, ThetaVector(np.asarray(theta_values, float)), demand, backend
    ).g


# ---------------------------------------------------------------------------
# corner-plot data

@dataclass
class CornerData:
    edges: list        # per-dim bin edges
    hist1d: list       # per-dim probability masses
    hist2d: dict       # (i, j) -> probability matrix
    theta_star: np.ndarray | None

    def to_jsonable(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "corner",
            "dims": len(self.edges),
            "theta_star": (
                None if self.theta_star is None
                else [float(x) for x in self.theta_star]
            ),
            "hist1d": [
                {"edges": [float(e) for e in edges],
                 "probs": [float(p) for p in probs]}
                for edges, probs in zip(self.edges, self.hist1d)
            ],
            "hist2d": [
                {"i": int(i), "j": int(j),
                 "probs": [[float(p) for p in row] for row in mat]}
                for (i, j), mat in sorted(self.hist2d.items())
            ],
        }


def corner_data(samples: np.ndarray, theta_star=None, bins: int = 30) -> CornerData:
    """Normalized 1-D and pairwise 2-D histograms of posterior samples."""
    samples = np.atleast_2d(np.asarray(samples, float))
    if samples.shape[0] < 1:
        raise ValueError("samples must be nonempty")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    n, d = samples.shape
    edges = []
    for i in range(d):
        lo, hi = samples[:, i].min(), samples[:, i].max()
        if lo == hi:  # degenerate spread still needs a finite range
            lo, hi = lo - 0.5, hi + 0.5
        edges.append(np.linspace(lo, hi, bins + 1))
    hist1d = []
    for i in range(d):
        counts, _ = np.histogram(samples[:, i], bins=edges[i])
        hist1d.append(counts / n)
    hist2d = {}
    for i in range(d):
        for j in range(i + 1, d):
            counts, _, _ = np.histogram2d(
                samples[:, i], samples[:, j], bins=(edges[i], edges[j])
            )
            hist2d[(i, j)] = counts / n
    return CornerData(
        edges=edges, hist1d=hist1d, hist2d=hist2d,
        theta_star=None if theta_star is None else np.asarray(theta_star, float),
    )
