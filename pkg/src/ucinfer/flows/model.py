"""Conditional normalizing flow: stacked masked autoregressive transforms.

The density direction maps a standardized parameter vector through each
transform toward a standard-normal base, accumulating log-determinants.
Sampling inverts the stack dimension by dimension. Both the affine (MAF)
and rational-quadratic spline (NSF) transforms share the same masked
conditioner and interface.

Standardization is part of the model: per-dimension affine statistics for
the parameter vector and the conditioning vector, fitted on training data.
``log_prob`` reports densities in original parameter units.
"""

from __future__ import annotations

import math

import numpy as np

from . import engine
from ..errors import DimensionMismatch, NonFiniteGradient, NonFiniteInput
from .engine import Tensor
from .made import MaskedConditioner
from .spline import SplineMaskedTransform

LOG_SCALE_CLAMP = 5.0

MAF = "maf"
NSF = "nsf"


class AffineMaskedTransform:
    """One MAF layer: z = (x - mu(x_<i, c)) * exp(-s(x_<i, c))."""

    def __init__(
        self,
        dim: int,
        context_dim: int,
        permutation: np.ndarray,
        hidden_sizes=(256, 256, 256),
        rng: np.random.Generator | None = None,
        zero_init_output: bool = True,
    ):
        self.dim = dim
        self.permutation = np.asarray(permutation, dtype=int)
        self.conditioner = MaskedConditioner(
            dim, context_dim, n_params=2, hidden_sizes=hidden_sizes,
            rng=rng, zero_init_output=zero_init_output,
        )

    def parameters(self) -> list:
        return self.conditioner.parameters()

    def shift_and_log_scale(self, x: Tensor, context: Tensor):
        out = self.conditioner.forward(x, context)
        mu = self.conditioner.param_block(out, 0)
        log_scale = engine.clip(
            self.conditioner.param_block(out, 1),
            -LOG_SCALE_CLAMP, LOG_SCALE_CLAMP,
        )
        return mu, log_scale

    def forward_density(self, u: Tensor, context: Tensor):
        x = engine.take_columns(u, self.permutation)
        mu, s = self.shift_and_log_scale(x, context)
        z = engine.mul(
            engine.add(x, engine.mul(mu, -1.0)), engine.exp(engine.mul(s, -1.0))
        )
        logdet = engine.mul(engine.tsum(s, axis=1), -1.0)
        return z, logdet

    def inverse(self, z: np.ndarray, context: np.ndarray) -> np.ndarray:
        """x_i = mu_i(x_<i, c) + z_i * exp(s_i(x_<i, c)), dimension by dimension."""
        z = np.asarray(z, dtype=float)
        x = np.zeros_like(z)
        with engine.no_grad():
            c_t = Tensor(context)
            for i in range(self.dim):
                mu, s = self.shift_and_log_scale(Tensor(x), c_t)
                x[:, i] = mu.data[:, i] + z[:, i] * np.exp(s.data[:, i])
        u = np.empty_like(x)
        u[:, self.permutation] = x
        return u


def _permutations(dim: int, n_transforms: int) -> list:
    perms = [np.arange(dim)]
    for _ in range(n_transforms - 1):
        perms.append(np.arange(dim)[::-1].copy())
    return perms


class FlowModel:
    """Conditional flow q(theta | context) with affine standardization."""

    def __init__(
        self,
        flow_kind: str,
        dim: int,
        context_dim: int,
        hidden_sizes=(256, 256, 256),
        n_transforms: int = 3,
        n_bins: int = 8,
        tail_bound: float = 5.0,
        rng: np.random.Generator | None = None,
        zero_init_output: bool = True,
    ):
        if flow_kind not in (MAF, NSF):
            raise ValueError(f"unknown flow kind {flow_kind!r}")
        rng = rng or np.random.default_rng(0)
        self.flow_kind = flow_kind
        self.dim = dim
        self.context_dim = context_dim
        self.hidden_sizes = tuple(hidden_sizes)
        self.n_transforms = n_transforms
        self.n_bins = n_bins
        self.tail_bound = float(tail_bound)
        self.config_hash = ""

        self.transforms = []
        for perm in _permutations(dim, n_transforms):
            if flow_kind == MAF:
                tr = AffineMaskedTransform(
                    dim, context_dim, perm, hidden_sizes=hidden_sizes,
                    rng=rng, zero_init_output=zero_init_output,
                )
            else:
                tr = SplineMaskedTransform(
                    dim, context_dim, perm, n_bins=n_bins,
                    tail_bound=tail_bound, hidden_sizes=hidden_sizes,
                    rng=rng, zero_init_output=zero_init_output,
                )
            self.transforms.append(tr)

        self.theta_mean = np.zeros(dim)
        self.theta_std = np.ones(dim)
        self.context_mean = np.zeros(context_dim)
        self.context_std = np.ones(context_dim)

    # -- standardization ----------------------------------------------------

    def set_standardizer(self, theta_mean, theta_std, context_mean, context_std):
        theta_std = np.asarray(theta_std, float)
        context_std = np.asarray(context_std, float)
        if np.any(theta_std <= 0) or np.any(context_std <= 0):
            raise ValueError("standardizer scales must be strictly positive")
        self.theta_mean = np.asarray(theta_mean, float).copy()
        self.theta_std = theta_std.copy()
        self.context_mean = np.asarray(context_mean, float).copy()
        self.context_std = context_std.copy()

    def standardize_theta(self, theta: np.ndarray) -> np.ndarray:
        return (theta - self.theta_mean) / self.theta_std

    def destandardize_theta(self, u: np.ndarray) -> np.ndarray:
        return u * self.theta_std + self.theta_mean

    def standardize_context(self, context: np.ndarray) -> np.ndarray:
        return (context - self.context_mean) / self.context_std

    @property
    def standardization_log_jacobian(self) -> float:
        """Constant added to standardized-space log densities."""
        return float(-np.log(self.theta_std).sum())

    # -- parameters -----------------------------------------------------------

    def parameters(self) -> list:
        params = []
        for tr in self.transforms:
            params.extend(tr.parameters())
        return params

    def zero_grads(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    # -- densities ------------------------------------------------------------

    def log_prob_tensor(self, u: Tensor, context: Tensor) -> Tensor:
        """Per-sample log density in standardized space (graph-building)."""
        logdet_total = None
        z = u
        for tr in self.transforms:
            z, logdet = tr.forward_density(z, context)
            logdet_total = logdet if logdet_total is None else engine.add(
                logdet_total, logdet
            )
        base = engine.add(
            engine.mul(engine.tsum(engine.square(z), axis=1), -0.5),
            -0.5 * self.dim * math.log(2.0 * math.pi),
        )
        return engine.add(base, logdet_total)

    def _check_finite(self, *arrays) -> None:
        for arr in arrays:
            if not np.all(np.isfinite(arr)):
                raise NonFiniteInput("non-finite values in flow inputs")

    def _as_batch(self, theta, context):
        theta = np.asarray(theta, dtype=float)
        context = np.asarray(context, dtype=float)
        single = theta.ndim == 1
        theta = np.atleast_2d(theta)
        context = np.atleast_2d(context)
        if context.shape[0] == 1 and theta.shape[0] > 1:
            context = np.broadcast_to(
                context, (theta.shape[0], context.shape[1])
            ).copy()
        if theta.shape[1] != self.dim:
            raise DimensionMismatch(
                f"theta has {theta.shape[1]} dims, model has {self.dim}"
            )
        if context.shape[1] != self.context_dim:
            raise DimensionMismatch(
                f"context has {context.shape[1]} dims, model has "
                f"{self.context_dim}"
            )
        if context.shape[0] != theta.shape[0]:
            raise DimensionMismatch("theta and context batch sizes differ")
        return theta, context, single

    def log_prob(self, theta, context):
        """Log density in original units; scalar for 1-D inputs."""
        theta, context, single = self._as_batch(theta, context)
        self._check_finite(theta, context)
        u = self.standardize_theta(theta)
        c = self.standardize_context(context)
        with engine.no_grad():
            lp = self.log_prob_tensor(Tensor(u), Tensor(c)).data
        lp = lp + self.standardization_log_jacobian
        return float(lp[0]) if single else lp

    def sample(self, context, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n parameter vectors conditioned on one context vector."""
        context = np.asarray(context, dtype=float)
        if context.ndim != 1:
            raise DimensionMismatch("sample() expects a single context vector")
        self._check_finite(context)
        c = np.broadcast_to(
            self.standardize_context(context), (n, self.context_dim)
        ).copy()
        z = rng.standard_normal((n, self.dim))
        for tr in reversed(self.transforms):
            z = tr.inverse(z, c)
        return self.destandardize_theta(z)

    def grad_mean_log_prob(self, theta_batch, context_batch):
        """Mean log_prob over the batch and its gradient per parameter.

        Returns (value, grads) where grads aligns with ``parameters()``.
        The additive standardization constant does not affect gradients but
        is included in the returned value.
        """
        theta, context, _ = self._as_batch(theta_batch, context_batch)
        if theta.shape[0] == 0:
            raise DimensionMismatch("batch must be nonempty")
        self._check_finite(theta, context)
        u = Tensor(self.standardize_theta(theta))
        c = Tensor(self.standardize_context(context))
        self.zero_grads()
        mean_lp = self.log_prob_tensor(u, c).mean()
        mean_lp.backward()
        grads = []
        for p in self.parameters():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradient("gradient contains NaN or infinity")
            grads.append(g)
        value = float(mean_lp.data) + self.standardization_log_jacobian
        if not math.isfinite(value):
            raise NonFiniteGradient("mean log probability is not finite")
        return value, grads
