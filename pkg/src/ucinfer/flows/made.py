"""Masked MLP conditioner with strict autoregressive structure.

Output block p for dimension i may depend only on input dimensions < i plus
the full conditioning vector; masks follow the degree construction of MADE.
The context enters every layer through a separate unmasked weight matrix, so
even dimension 0 (whose masked path is empty) is conditioned.
"""

from __future__ import annotations

import numpy as np

from . import engine
from ..errors import DimensionMismatch
from .engine import Tensor


def _degrees(dim: int, hidden_sizes) -> list:
    """Degree vectors for inputs, each hidden layer, and outputs."""
    degs = [np.arange(1, dim + 1)]
    top = max(1, dim - 1)
    for width in hidden_sizes:
        degs.append((np.arange(width) % top) + 1)
    return degs


class MaskedConditioner:
    """Feed-forward masked network emitting ``n_params`` values per dimension.

    Output columns are grouped parameter-major: columns [p*dim, (p+1)*dim)
    hold parameter p for every dimension.
    """

    def __init__(
        self,
        dim: int,
        context_dim: int,
        n_params: int,
        hidden_sizes=(256, 256, 256),
        rng: np.random.Generator | None = None,
        zero_init_output: bool = True,
    ):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        rng = rng or np.random.default_rng(0)
        self.dim = dim
        self.context_dim = context_dim
        self.n_params = n_params
        self.hidden_sizes = tuple(hidden_sizes)

        degs = _degrees(dim, hidden_sizes)
        self.masks = []
        for prev, cur in zip(degs[:-1], degs[1:]):
            self.masks.append((cur[None, :] >= prev[:, None]).astype(float))
        out_deg = np.tile(degs[0], n_params)
        self.masks.append((out_deg[None, :] > degs[-1][:, None]).astype(float))

        self.weights = []
        self.context_weights = []
        self.biases = []
        sizes = [dim, *hidden_sizes, dim * n_params]
        for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            last = layer == len(sizes) - 2
            if last and zero_init_output:
                w = np.zeros((fan_in, fan_out))
                v = np.zeros((context_dim, fan_out))
            else:
                scale = 1.0 / np.sqrt(fan_in + context_dim)
                w = rng.uniform(-scale, scale, size=(fan_in, fan_out))
                v = rng.uniform(-scale, scale, size=(context_dim, fan_out))
            self.weights.append(Tensor(w, requires_grad=True))
            self.context_weights.append(Tensor(v, requires_grad=True))
            self.biases.append(Tensor(np.zeros(fan_out), requires_grad=True))

    def parameters(self) -> list:
        params = []
        for w, v, b in zip(self.weights, self.context_weights, self.biases):
            params.extend((w, v, b))
        return params

    def forward(self, x: Tensor, context: Tensor) -> Tensor:
        """Return the (N, dim * n_params) output tensor."""
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"input has {x.shape[-1]} dims, want {self.dim}")
        if context.shape[-1] != self.context_dim:
            raise DimensionMismatch(
                f"context has {context.shape[-1]} dims, want {self.context_dim}"
            )
        h = x
        n_layers = len(self.weights)
        for layer in range(n_layers):
            masked = engine.mul(self.weights[layer], self.masks[layer])
            pre = engine.add(
                engine.add(
                    engine.matmul(h, masked),
                    engine.matmul(context, self.context_weights[layer]),
                ),
                self.biases[layer],
            )
            h = engine.relu(pre) if layer < n_layers - 1 else pre
        return h

    def param_block(self, out: Tensor, p: int) -> Tensor:
        """Slice parameter block p as an (N, dim) tensor."""
        cols = np.arange(p * self.dim, (p + 1) * self.dim)
        return engine.take_columns(out, cols)
