"""Neural posterior estimation: fit the flow to simulated (theta, context) pairs.

The loss is the mean negative log density of true parameters under the flow,
so minimizing it maximizes the expected log posterior over the simulated
joint. Training runs a fixed number of epochs of shuffled mini-batch Adam
and keeps the parameter snapshot with the lowest full-validation NLL.

The conditioning vector ("context") for a UC observation is the flattened
dispatch matrix concatenated with the demand profile; each coordinate is
z-scored with training-set statistics. Commitment indicators are not fed to
the flow - they are implied by the dispatch levels.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigHashMismatch, DimensionMismatch, NonFiniteGradient, NonFiniteLoss
from .flows import FlowModel
from .simfarm import Scenario, read_dataset


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 256
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    flow_kind: str = "maf"
    shuffle: bool = True
    hidden_sizes: tuple = (256, 256, 256)
    n_transforms: int = 3
    n_bins: int = 8
    tail_bound: float = 5.0
    grad_clip: float | None = None  # opt-in; off reproduces the plain recipe

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size and learning_rate must be positive")

    @classmethod
    def from_jsonable(cls, d: dict, seed: int = 0) -> "TrainConfig":
        return cls(
            epochs=int(d.get("epochs", 100)),
            batch_size=int(d.get("batch_size", 256)),
            learning_rate=float(d.get("learning_rate", 0.001)),
            seed=int(d.get("seed", seed)),
            flow_kind=str(d.get("flow_kind", "maf")),
            shuffle=bool(d.get("shuffle", True)),
            hidden_sizes=tuple(d.get("hidden_sizes", (256, 256, 256))),
            n_transforms=int(d.get("n_transforms", 3)),
            n_bins=int(d.get("n_bins", 8)),
            tail_bound=float(d.get("tail_bound", 5.0)),
            grad_clip=(None if d.get("grad_clip") is None
                       else float(d["grad_clip"])),
        )


@dataclass
class LearningCurve:
    train_nll: list = field(default_factory=list)
    val_nll: list = field(default_factory=list)
    selected_epoch: int = 0  # 1-based

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_nll", "val_nll", "selected"])
            for i, (tr, vl) in enumerate(zip(self.train_nll, self.val_nll), 1):
                writer.writerow(
                    [i, f"{tr:.17g}", f"{vl:.17g}",
                     1 if i == self.selected_epoch else 0]
                )


@dataclass(frozen=True, eq=False)
class TrainingData:
    """Stacked parameter/observation pairs ready for the flow."""

    theta: np.ndarray
    context: np.ndarray
    config_hash: str = ""

    def __post_init__(self):
        if self.theta.shape[0] != self.context.shape[0]:
            raise DimensionMismatch("theta and context row counts differ")

    @property
    def n(self) -> int:
        return self.theta.shape[0]


def build_context(g: np.ndarray, demand: np.ndarray) -> np.ndarray:
    """Observation vector for the flow: dispatch matrix then demand."""
    g = np.asarray(g, float)
    demand = np.asarray(demand, float)
    return np.concatenate([g.reshape(g.shape[0], -1), demand], axis=-1) \
        if g.ndim == 3 else np.concatenate([g.ravel(), demand])


def context_dim(n_units: int, horizon: int) -> int:
    return n_units * horizon + horizon


def load_training_data(dataset_path: str, scenario: Scenario) -> TrainingData:
    thetas, contexts = [], []
    for rec in read_dataset(dataset_path, scenario):
        thetas.append(rec.theta)
        contexts.append(build_context(rec.g, rec.demand))
    return TrainingData(
        theta=np.asarray(thetas), context=np.asarray(contexts),
        config_hash=scenario.config_hash(),
    )


# ---------------------------------------------------------------------------
# optimizer

@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(params, grads, state: AdamState, config: TrainConfig):
    """One bias-corrected Adam update; returns (new_params, state)."""
    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = b1 * state.m[i] + (1 - b1) * g
        state.v[i] = b2 * state.v[i] + (1 - b2) * (g * g)
        m_hat = state.m[i] / (1 - b1 ** t)
        v_hat = state.v[i] / (1 - b2 ** t)
        out.append(p - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps))
    return out, state


# ---------------------------------------------------------------------------
# loss and training

def nll_loss(model: FlowModel, theta_batch, context_batch) -> float:
    """Mean negative log density of the batch under the model."""
    theta_batch = np.atleast_2d(np.asarray(theta_batch, float))
    if theta_batch.shape[0] == 0:
        raise DimensionMismatch("batch must be nonempty")
    lp = model.log_prob(theta_batch, context_batch)
    loss = float(-np.mean(lp))
    if not math.isfinite(loss):
        raise NonFiniteLoss(f"NLL is {loss}")
    return loss


def _full_nll(model: FlowModel, data: TrainingData, chunk: int = 4096) -> float:
    total = 0.0
    for at in range(0, data.n, chunk):
        lp = model.log_prob(data.theta[at:at + chunk], data.context[at:at + chunk])
        total += float(np.sum(lp))
    return -total / data.n


def _snapshot(model: FlowModel) -> list:
    return [p.data.copy() for p in model.parameters()]


def _restore(model: FlowModel, snapshot) -> None:
    for p, data in zip(model.parameters(), snapshot):
        p.data = data.copy()


def fit_standardizer(model: FlowModel, data: TrainingData) -> None:
    """Z-scoring statistics from the training split only.

    Constant coordinates (common in dispatch matrices: a unit that never
    runs at hour t) get unit scale so they standardize to exactly zero.
    """
    def stats(x):
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std > 1e-12, std, 1.0)
        return mean, std

    t_mean, t_std = stats(data.theta)
    c_mean, c_std = stats(data.context)
    model.set_standardizer(t_mean, t_std, c_mean, c_std)


def train(
    train_data: TrainingData,
    val_data: TrainingData,
    config: TrainConfig,
) -> tuple:
    """Fit a flow; returns (model with best-epoch weights, LearningCurve)."""
    if train_data.config_hash != val_data.config_hash:
        raise ConfigHashMismatch(
            "training and validation sets come from different configurations"
        )
    if config.batch_size > train_data.n:
        raise ValueError("batch_size exceeds the training set size")

    d = train_data.theta.shape[1]
    c_dim = train_data.context.shape[1]
    rng_init = np.random.default_rng([config.seed, 0])
    rng_shuffle = np.random.default_rng([config.seed, 1])

    model = FlowModel(
        config.flow_kind, dim=d, context_dim=c_dim,
        hidden_sizes=config.hidden_sizes, n_transforms=config.n_transforms,
        n_bins=config.n_bins, tail_bound=config.tail_bound, rng=rng_init,
    )
    model.config_hash = train_data.config_hash
    fit_standardizer(model, train_data)

    params = model.parameters()
    state = AdamState.for_params([p.data for p in params])
    curve = LearningCurve()
    best_val = math.inf
    best_snapshot = None

    for epoch in range(1, config.epochs + 1):
        order = (rng_shuffle.permutation(train_data.n) if config.shuffle
                 else np.arange(train_data.n))
        loss_sum = 0.0
        try:
            for at in range(0, train_data.n, config.batch_size):
                idx = order[at:at + config.batch_size]
                value, grads = model.grad_mean_log_prob(
                    train_data.theta[idx], train_data.context[idx]
                )
                loss_sum += -value * idx.size
                grads = [-g for g in grads]
                if config.grad_clip is not None:
                    norm = math.sqrt(sum(float((g * g).sum()) for g in grads))
                    if norm > config.grad_clip:
                        scale = config.grad_clip / norm
                        grads = [g * scale for g in grads]
                new_values, state = adam_step(
                    [p.data for p in params], grads, state, config
                )
                for p, value_arr in zip(params, new_values):
                    p.data = value_arr
        except (NonFiniteGradient, NonFiniteLoss):
            if best_snapshot is None:
                raise
            break  # keep the last good checkpoint
        curve.train_nll.append(loss_sum / train_data.n)
        val_nll = _full_nll(model, val_data)
        curve.val_nll.append(val_nll)
        if val_nll < best_val:
            best_val = val_nll
            best_snapshot = _snapshot(model)
            curve.selected_epoch = epoch

    if best_snapshot is not None:
        _restore(model, best_snapshot)
    return model, curve
