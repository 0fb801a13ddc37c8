"""Binary checkpoint format for flow models.

Layout (all little-endian): magic ``UCFLOW01``, then a fixed header
(version, flow kind, dims, architecture, spline settings), a length-prefixed
config-hash string, the four standardizer vectors, each transform's
permutation, and finally every parameter tensor in ``parameters()`` order as
shape-prefixed float64 buffers. Write-then-read is bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import SchemaMismatch
from .model import MAF, NSF, FlowModel

MAGIC = b"UCFLOW01"
VERSION = 1
_KIND_CODE = {MAF: 0, NSF: 1}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def _write_array(fh, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    fh.write(struct.pack("<I", arr.ndim))
    fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    fh.write(arr.tobytes())


def _read_array(fh) -> np.ndarray:
    (ndim,) = struct.unpack("<I", fh.read(4))
    shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
    count = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(fh.read(8 * count), dtype="<f8").astype(float)
    return data.reshape(shape)


def save_checkpoint(path, model: FlowModel) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<B", _KIND_CODE[model.flow_kind]))
        fh.write(struct.pack("<III", model.dim, model.context_dim,
                             model.n_transforms))
        fh.write(struct.pack("<I", len(model.hidden_sizes)))
        fh.write(struct.pack(f"<{len(model.hidden_sizes)}I",
                             *model.hidden_sizes))
        fh.write(struct.pack("<Id", model.n_bins, model.tail_bound))
        blob = model.config_hash.encode("utf-8")
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for arr in (model.theta_mean, model.theta_std,
                    model.context_mean, model.context_std):
            _write_array(fh, arr)
        for tr in model.transforms:
            _write_array(fh, tr.permutation.astype(float))
        for p in model.parameters():
            _write_array(fh, p.data)


def load_checkpoint(path) -> FlowModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise SchemaMismatch(f"{path}: not a flow checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise SchemaMismatch(f"{path}: unsupported checkpoint version {version}")
        (kind_code,) = struct.unpack("<B", fh.read(1))
        dim, context_dim, n_transforms = struct.unpack("<III", fh.read(12))
        (n_hidden,) = struct.unpack("<I", fh.read(4))
        hidden_sizes = struct.unpack(f"<{n_hidden}I", fh.read(4 * n_hidden))
        n_bins, tail_bound = struct.unpack("<Id", fh.read(12))
        (hash_len,) = struct.unpack("<I", fh.read(4))
        config_hash = fh.read(hash_len).decode("utf-8")

        model = FlowModel(
            flow_kind=_CODE_KIND[kind_code], dim=dim, context_dim=context_dim,
            hidden_sizes=hidden_sizes, n_transforms=n_transforms,
            n_bins=n_bins, tail_bound=tail_bound,
        )
        model.config_hash = config_hash
        model.theta_mean = _read_array(fh)
        model.theta_std = _read_array(fh)
        model.context_mean = _read_array(fh)
        model.context_std = _read_array(fh)
        for tr in model.transforms:
            tr.permutation = _read_array(fh).astype(int)
        for p in model.parameters():
            arr = _read_array(fh)
            if arr.shape != p.data.shape:
                raise SchemaMismatch(
                    f"{path}: parameter shape {arr.shape} != {p.data.shape}"
                )
            p.data = arr
    return model
