import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ucinfer import jsonio
from ucinfer.errors import NonFiniteInput


def test_dumps_is_plain_json():
    doc = {"a": 1, "b": [1.5, "x", None, True], "c": {"d": False}}
    assert json.loads(jsonio.dumps(doc)) == doc


def test_floats_carry_17_significant_digits():
    text = jsonio.dumps({"x": 0.1})
    assert "0.10000000000000001" in text


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip_is_bit_exact(x):
    back = json.loads(jsonio.dumps([x]))[0]
    assert math.copysign(1, x) == math.copysign(1, back) or x == 0
    assert float(back) == x or (x == 0 and back == 0)


def test_non_finite_rejected():
    with pytest.raises(NonFiniteInput):
        jsonio.dumps({"x": float("nan")})
    with pytest.raises(NonFiniteInput):
        jsonio.dumps([float("inf")])


def test_key_order_preserved_and_hash_stable():
    a = {"x": 1, "y": 2}
    b = {"y": 2, "x": 1}
    assert jsonio.dumps(a) != jsonio.dumps(b)
    assert jsonio.sha256_of(a) == jsonio.sha256_of({"x": 1, "y": 2})


def test_save_load_round_trip(tmp_path):
    doc = {"v": [1.0 / 3.0, 2.0 / 7.0], "n": 42}
    path = tmp_path / "doc.json"
    jsonio.save(path, doc)
    back = jsonio.load(path)
    assert np.asarray(back["v"]).tolist() == doc["v"]
    assert back["n"] == 42
