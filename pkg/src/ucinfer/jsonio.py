"""Canonical JSON writing with exact float round-trips.

All persisted files (fleet configs, dataset records, manifests) are written
through :func:`dumps` so that floats appear as decimals with 17 significant
digits, which uniquely identifies every IEEE-754 double. Keys are emitted in
insertion order; the byte output is a pure function of the value tree.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

from .errors import NonFiniteInput


def _render(value: Any, out: list) -> None:
    if value is None or value is True or value is False:
        out.append(json.dumps(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, bool):  # pragma: no cover - caught above
        out.append(json.dumps(value))
    elif isinstance(value, int):
        out.append(repr(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise NonFiniteInput(f"cannot serialize non-finite float {value!r}")
        out.append(format(value, ".17g"))
    elif isinstance(value, dict):
        out.append("{")
        for i, (key, item) in enumerate(value.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key)}")
            if i:
                out.append(", ")
            out.append(json.dumps(key))
            out.append(": ")
            _render(item, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(", ")
            _render(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value)} to canonical JSON")


def dumps(value: Any) -> str:
    """Serialize ``value`` to a single-line canonical JSON string."""
    out: list = []
    _render(value, out)
    return "".join(out)


def loads(text: str) -> Any:
    return json.loads(text)


def save(path, value: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(value))
        fh.write("\n")


def load(path) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.loads(fh.read())


def sha256_of(value: Any) -> str:
    """Hex digest of the canonical JSON encoding of ``value``."""
    return hashlib.sha256(dumps(value).encode("utf-8")).hexdigest()
