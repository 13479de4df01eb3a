import json

import numpy as np
import pytest

from affinesphere.const import NAME
from affinesphere.export import format_number, output_lock, plain, write_csv, write_json
from affinesphere.geometry.errors import ConfigError


def test__format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(np.float64(1 / 3))) == 1 / 3
    assert format_number(np.int64(7)) == "7"
    assert format_number(np.bool_(True)) == "true"
    assert format_number("") == ""
    assert format_number(None) == ""
    assert format_number(-0.0) == "0"


def test__plain_values():
    value = plain({"b": np.array([1.0, np.nan]), "a": (np.int32(2), np.bool_(False))})
    assert value == {"a": [2, False], "b": [1.0, None]}
    assert list(value) == ["a", "b"]


def test__plain_drops_the_sign_of_zero():
    value = plain({"nu": np.array([-0.0, -0.0, 1.0]), "x": -0.0})
    assert json.dumps(value, sort_keys=True) == '{"nu": [0.0, 0.0, 1.0], "x": 0.0}'


def test__write_csv_counts_rows(tmp_path):
    path = tmp_path / "out.csv"
    assert write_csv(path, ["t1", "u"], [[0.5, -0.25], [np.float64(0.0), -1.0]]) == 2
    assert path.read_text().splitlines() == ["t1,u", "0.5,-0.25", "0,-1"]


def test__write_json_embeds_the_config(tmp_path):
    path = tmp_path / "out.json"
    write_json(path, {"passed": np.bool_(True), "error": np.inf}, config={"grid": 33})
    document = json.loads(path.read_text())
    assert document["tool"] == NAME
    assert document["config"] == {"grid": 33}
    assert document["passed"] is True
    assert document["error"] is None


def test__output_lock_is_exclusive_and_released(tmp_path):
    out = tmp_path / "run.csv"
    with output_lock(out, None):
        assert (tmp_path / "run.csv.lock").exists()
        with pytest.raises(ConfigError):
            with output_lock(out):
                pass
        assert (tmp_path / "run.csv.lock").exists()
    assert not (tmp_path / "run.csv.lock").exists()
