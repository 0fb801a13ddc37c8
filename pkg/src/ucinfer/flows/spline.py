"""Monotone rational-quadratic spline transform (autoregressive, conditional).

K bins on [-B, B] with linear tails: inputs outside the interval map to
themselves with unit derivative. Bin widths and heights come from softmaxes
(with a small floor for stability), knot derivatives from a softplus shifted
so that zero conditioner output yields the identity map. Gradients flow both
into the conditioner parameters and through the transform input, so layers
can be stacked.
"""

from __future__ import annotations

import numpy as np

from . import engine
from .engine import Tensor
from .made import MaskedConditioner

_MIN_BIN = 1e-3
_MIN_DERIVATIVE = 1e-6
# softplus(x + _DERIV_SHIFT) + _MIN_DERIVATIVE == 1 at x == 0
_DERIV_SHIFT = float(np.log(np.expm1(1.0 - _MIN_DERIVATIVE)))


class SplineMaskedTransform:
    """One autoregressive rational-quadratic spline layer."""

    def __init__(
        self,
        dim: int,
        context_dim: int,
        permutation: np.ndarray,
        n_bins: int = 8,
        tail_bound: float = 5.0,
        hidden_sizes=(256, 256, 256),
        rng: np.random.Generator | None = None,
        zero_init_output: bool = True,
    ):
        self.dim = dim
        self.n_bins = n_bins
        self.tail_bound = float(tail_bound)
        self.permutation = np.asarray(permutation, dtype=int)
        self.n_params = 3 * n_bins - 1
        self.conditioner = MaskedConditioner(
            dim, context_dim, self.n_params, hidden_sizes=hidden_sizes,
            rng=rng, zero_init_output=zero_init_output,
        )

    def parameters(self) -> list:
        return self.conditioner.parameters()

    def _block_index(self, first_param: int, count: int) -> np.ndarray:
        """Columns of params [first_param, first_param+count) per dimension.

        Conditioner output is parameter-major (param p of dim j sits at
        column p*dim + j); the knot tensors want (dim, param) order.
        """
        d = self.dim
        params = np.arange(first_param, first_param + count)
        return (params[None, :] * d + np.arange(d)[:, None]).ravel()

    def _knots(self, raw: Tensor, n: int):
        """Knot tensors of shape (n, dim, K) / (n, dim, K-1)."""
        d, K = self.dim, self.n_bins
        w_raw = _reshape3(
            engine.take_columns(raw, self._block_index(0, K)), n, d, K
        )
        h_raw = _reshape3(
            engine.take_columns(raw, self._block_index(K, K)), n, d, K
        )
        s_raw = _reshape3(
            engine.take_columns(raw, self._block_index(2 * K, K - 1)),
            n, d, K - 1,
        )
        two_b = 2.0 * self.tail_bound
        widths = engine.mul(
            engine.add(engine.mul(engine.softmax(w_raw), 1.0 - _MIN_BIN * K),
                       _MIN_BIN),
            two_b,
        )
        heights = engine.mul(
            engine.add(engine.mul(engine.softmax(h_raw), 1.0 - _MIN_BIN * K),
                       _MIN_BIN),
            two_b,
        )
        derivs = engine.add(
            engine.softplus(engine.add(s_raw, _DERIV_SHIFT)), _MIN_DERIVATIVE
        )
        return widths, heights, derivs

    def forward_density(self, u: Tensor, context: Tensor):
        """Map u -> z in the density direction; returns (z, log|det J|)."""
        x = engine.take_columns(u, self.permutation)
        raw = self.conditioner.forward(x, context)
        n = x.shape[0]
        widths, heights, derivs = self._knots(raw, n)

        B = self.tail_bound
        xd = x.data
        inside = (np.abs(xd) <= B).astype(float)[..., None]

        cumw = engine.cumsum(widths)   # right edges, measured from -B
        cumh = engine.cumsum(heights)
        xb_data = np.clip(xd, -B, B) + B
        k = np.sum(cumw.data[..., :-1] <= xb_data[..., None], axis=-1)[..., None]
        k = np.clip(k, 0, self.n_bins - 1)

        x3 = _unsqueeze_last(x)
        xb = engine.add(engine.clip(x3, -B, B), B)

        w_k = engine.gather_last(widths, k)
        h_k = engine.gather_last(heights, k)
        left = engine.add(engine.gather_last(cumw, k), engine.mul(w_k, -1.0))
        bottom = engine.add(engine.gather_last(cumh, k), engine.mul(h_k, -1.0))
        ones = Tensor(np.ones((n, self.dim, 1)))
        padded = _concat_last([ones, derivs, ones])
        d_k = engine.gather_last(padded, k)
        d_k1 = engine.gather_last(padded, k + 1)

        s_k = engine.mul(h_k, engine.reciprocal(w_k))
        xi = engine.mul(engine.add(xb, engine.mul(left, -1.0)),
                        engine.reciprocal(w_k))
        omx = engine.add(engine.mul(xi, -1.0), 1.0)
        xi_omx = engine.mul(xi, omx)
        twist = engine.add(engine.add(d_k1, d_k), engine.mul(s_k, -2.0))

        denom = engine.add(s_k, engine.mul(twist, xi_omx))
        numer = engine.mul(
            h_k,
            engine.add(engine.mul(s_k, engine.square(xi)),
                       engine.mul(d_k, xi_omx)),
        )
        z_in = engine.add(
            engine.add(bottom, engine.mul(numer, engine.reciprocal(denom))),
            -B,
        )
        deriv_num = engine.mul(
            engine.square(s_k),
            engine.add(
                engine.mul(d_k1, engine.square(xi)),
                engine.add(engine.mul(engine.mul(s_k, 2.0), xi_omx),
                           engine.mul(d_k, engine.square(omx))),
            ),
        )
        logdet_in = engine.add(engine.log(deriv_num),
                               engine.mul(engine.log(denom), -2.0))

        mask = Tensor(inside)
        outside_mask = Tensor(1.0 - inside)
        z3 = engine.add(engine.mul(mask, z_in), engine.mul(outside_mask, x3))
        logdet3 = engine.mul(mask, logdet_in)
        z = _squeeze_last(z3)
        logdet = engine.tsum(_squeeze_last(logdet3), axis=1)
        return z, logdet

    # -- sampling direction -----------------------------------------------

    def _spline_params_numeric(self, x: np.ndarray, context: np.ndarray):
        with engine.no_grad():
            raw = self.conditioner.forward(Tensor(x), Tensor(context))
            widths, heights, derivs = self._knots(raw, x.shape[0])
        return widths.data, heights.data, derivs.data

    def inverse(self, z: np.ndarray, context: np.ndarray) -> np.ndarray:
        """Invert dimension by dimension (numeric path, no gradients)."""
        z = np.asarray(z, dtype=float)
        n, d = z.shape
        B = self.tail_bound
        x = np.zeros_like(z)
        for i in range(d):
            widths, heights, derivs = self._spline_params_numeric(x, context)
            w = widths[:, i, :]
            h = heights[:, i, :]
            dv = np.concatenate(
                [np.ones((n, 1)), derivs[:, i, :], np.ones((n, 1))], axis=1
            )
            cw = np.cumsum(w, axis=1)
            ch = np.cumsum(h, axis=1)
            zi = z[:, i]
            inside = np.abs(zi) <= B
            zb = np.clip(zi, -B, B) + B
            k = np.clip(
                np.sum(ch[:, :-1] <= zb[:, None], axis=1), 0, self.n_bins - 1
            )
            rows = np.arange(n)
            wk = w[rows, k]
            hk = h[rows, k]
            left = cw[rows, k] - wk
            bottom = ch[rows, k] - hk
            dk = dv[rows, k]
            dk1 = dv[rows, k + 1]
            sk = hk / wk
            dz = zb - bottom
            twist = dk1 + dk - 2.0 * sk
            a = hk * (sk - dk) + dz * twist
            b = hk * dk - dz * twist
            c = -sk * dz
            disc = np.maximum(b * b - 4.0 * a * c, 0.0)
            xi = 2.0 * c / (-b - np.sqrt(disc))
            x[:, i] = np.where(inside, left + xi * wk - B, zi)
        u = np.empty_like(x)
        u[:, self.permutation] = x
        return u


def _reshape3(t: Tensor, n: int, d: int, k: int) -> Tensor:
    data = t.data.reshape(n, d, k)

    def backward(g):
        engine._accumulate(t, np.asarray(g, float).reshape(n, d * k))

    return engine._make(data, (t,), backward)


def _unsqueeze_last(t: Tensor) -> Tensor:
    data = t.data[..., None]

    def backward(g):
        engine._accumulate(t, np.asarray(g, float)[..., 0])

    return engine._make(data, (t,), backward)


def _squeeze_last(t: Tensor) -> Tensor:
    data = t.data[..., 0]

    def backward(g):
        engine._accumulate(t, np.asarray(g, float)[..., None])

    return engine._make(data, (t,), backward)


def _concat_last(tensors) -> Tensor:
    tensors = [engine.as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=-1)
    sizes = [t.data.shape[-1] for t in tensors]

    def backward(g):
        g = np.asarray(g, float)
        at = 0
        for t, size in zip(tensors, sizes):
            engine._accumulate(t, g[..., at:at + size])
            at += size

    return engine._make(data, tuple(tensors), backward)
