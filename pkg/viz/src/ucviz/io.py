"""Readers for the pipeline's documented output formats."""

from __future__ import annotations

import csv
import json

import numpy as np


class SchemaError(ValueError):
    pass


def read_csv_columns(path, required) -> dict:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(required) - set(reader.fieldnames or ())
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    out = {}
    for name in reader.fieldnames:
        out[name] = np.array([float(row[name]) for row in rows])
    return out


def read_coverage(path) -> dict:
    return read_csv_columns(path, ["level", "coverage", "ci_low", "ci_high"])


def read_curves(path) -> dict:
    return read_csv_columns(path, ["epoch", "train_nll", "val_nll", "selected"])


def read_ppc(path) -> dict:
    cols = read_csv_columns(
        path,
        ["unit", "t", "q_lo_3s", "q_lo_2s", "q_lo_1s", "median", "mean",
         "q_hi_1s", "q_hi_2s", "q_hi_3s", "g_true"],
    )
    units = np.unique(cols["unit"]).astype(int)
    per_unit = {}
    for j in units:
        mask = cols["unit"].astype(int) == j
        order = np.argsort(cols["t"][mask])
        per_unit[int(j)] = {
            name: cols[name][mask][order] for name in cols if name != "unit"
        }
    return per_unit


def read_corner(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "corner":
        raise SchemaError(f"{path}: not a corner histogram file")
    return doc
