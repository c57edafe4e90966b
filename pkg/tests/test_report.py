import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvref.report import dumps


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert json.loads(dumps({"x": x}))["x"] == x


def test_seventeen_digits():
    text = dumps({"x": 0.1})
    assert '"x": 0.10000000000000001' in text


def test_nested_structure():
    obj = {
        "a": [1, 2.5, None, True],
        "b": {"c": np.array([[1.0, 2.0], [3.0, 4.0]]), "d": "é"},
        "e": [],
        "f": {},
        "g": [{"h": np.float64(1.0)}],
    }
    back = json.loads(dumps(obj))
    assert back == {
        "a": [1, 2.5, None, True],
        "b": {"c": [[1.0, 2.0], [3.0, 4.0]], "d": "é"},
        "e": [],
        "f": {},
        "g": [{"h": 1.0}],
    }


def test_integral_float_stays_float():
    assert isinstance(json.loads(dumps({"x": 2.0}))["x"], float)


def test_non_finite_is_null():
    assert json.loads(dumps({"x": float("nan")}))["x"] is None


def test_rejects_unknown():
    with pytest.raises(TypeError):
        dumps({"x": object()})
