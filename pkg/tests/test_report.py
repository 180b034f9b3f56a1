import json

import numpy as np
import pytest

from abflat.report import merge, summarize, to_json


def test_summarize_statistics_and_violation():
    rep = summarize("t", [1e-12, -3e-9, 2e-10], 1e-9, points=np.arange(6).reshape(3, 2))
    assert rep.samples == 3
    assert rep.max_residual == pytest.approx(3e-9)
    assert not rep.passed
    assert rep.first_violation == {"index": 1, "point": [2.0, 3.0], "value": 3e-9}


def test_vector_residuals_reduce_per_sample():
    rep = summarize("t", np.array([[0.0, 1e-3], [2e-3, 0.0]]), 1e-2)
    assert rep.passed and rep.samples == 2 and rep.max_residual == pytest.approx(2e-3)


def test_nan_is_a_failure():
    assert not summarize("t", [0.0, np.nan], 1.0).passed


def test_merge_uses_worst_check():
    a = summarize("a", [1e-10], 1e-8)
    b = summarize("b", [5e-8], 1e-8)
    m = merge("all", [a, b], 1e-8)
    assert not m.passed
    assert m.first_violation["check"] == "b"
    assert m.samples == 2


def test_json_is_deterministic_and_valid():
    rep = summarize("t", [0.1, 0.2], 1.0)
    rep.wall_time_ms = 12.5
    one = to_json("t", {"b": 1.0, "a": [np.float64(1 / 3), None]}, rep)
    assert one == to_json("t", {"a": [1 / 3, None], "b": 1.0}, rep)
    data = json.loads(one)
    assert data["config"]["a"][0] == 1 / 3
    assert "wall_time_ms" not in data["report"]
    assert json.loads(to_json("t", {}, rep, timing=True))["report"]["wall_time_ms"] == 12.5
