import csv
import io
import json
import math

import numpy as np
import pytest

from adiastab.exceptions import ConfigError
from adiastab.io import csv_text, dumps, load_config, parse_config, to_plain

DW = {"generator": "double-well", "params": {"delta": 0.05}}


def test_to_plain_handles_numpy_and_non_finite():
    out = to_plain({"a": np.float64(1.5), "b": np.array([1, 2]), "c": math.inf, "d": np.nan, "e": 1 + 2j})
    assert out == {"a": 1.5, "b": [1, 2], "c": "inf", "d": "nan", "e": [1.0, 2.0]}


def test_dumps_is_canonical():
    a = dumps({"b": 0.1, "a": [1, 2.5e-300]})
    b = dumps({"a": [1, 2.5e-300], "b": 0.1})
    assert a == b
    assert a.endswith("\n")
    assert "0.1" in a and "2.5e-300" in a
    assert json.loads(a) == {"a": [1, 2.5e-300], "b": 0.1}


def test_csv_rfc4180():
    text = csv_text(["x", "note"], [[0.1, 'a,"b"'], [None, True]])
    assert text.split("\r\n")[0] == "x,note"
    assert '"a,""b"""' in text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[1] == ["0.1", 'a,"b"']
    assert rows[2] == ["", "true"]


def test_parse_minimal():
    cfg = parse_config({"family": DW})
    assert cfg.T == [10.0]
    assert cfg.s_grid == 257
    assert cfg.q_matrix == "full"


def test_parse_logspace():
    cfg = parse_config({"family": DW, "T": {"logspace": [0, 2, 3]}})
    assert cfg.T == pytest.approx([1.0, 10.0, 100.0])


@pytest.mark.parametrize("obj, field", [
    ({"family": DW, "T": [10, -1]}, "T[1]"),
    ({"family": DW, "T": {"logspace": [0, 1]}}, "T.logspace"),
    ({"family": DW, "bogus": 1}, "bogus"),
    ({"family": {"generator": "nope"}}, "family.generator"),
    ({"family": DW, "tolerances": {"step": -1}}, "tolerances.step"),
    ({"family": DW, "tolerances": {"nope": 1}}, "tolerances.nope"),
    ({"family": DW, "s_grid": [0, 0.5]}, "s_grid"),
    ({"family": DW, "q_matrix": "half"}, "q_matrix"),
    ({"family": DW, "grading": [0, "x"]}, "grading"),
    ({"family": DW, "seed": -3}, "seed"),
    ({"T": 1}, "family"),
])
def test_parse_errors_name_the_field(obj, field):
    with pytest.raises(ConfigError) as exc:
        parse_config(obj)
    assert exc.value.field == field


def test_bad_generator_params():
    cfg = parse_config({"family": {"generator": "double-well", "params": {"width": 3}}})
    with pytest.raises(ConfigError) as exc:
        cfg.families()
    assert exc.value.field == "family.params"


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"family": {"generator": "double-well"},\n  "T": [1,]\n}')
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.field == "<json>"
    assert "line 2" in str(exc.value)


def test_family_file_relative_to_config(tmp_path, dw):
    (tmp_path / "fam.json").write_text(json.dumps(dw.to_json()))
    (tmp_path / "c.json").write_text(json.dumps({"family": {"file": "fam.json"}}))
    fam = load_config(tmp_path / "c.json").families()[0]
    assert np.allclose(fam.A(0.3), dw.A(0.3))


def test_ensemble_is_seeded():
    obj = {"family": {"generator": "random-graded", "params": {"n": 4}}, "ensemble": 3, "seed": 5}
    a = parse_config(obj).families()
    b = parse_config(obj).families()
    assert len(a) == 3
    assert all(np.array_equal(x.A(0.5), y.A(0.5)) for x, y in zip(a, b))
    assert not np.array_equal(a[0].A(0.5), a[1].A(0.5))


def test_grading_override_regrades(dw):
    fam = parse_config({"family": DW, "grading": [0, 2]}).families()[0]
    assert fam.grading.s_indices == (0, 2)
    assert np.allclose(fam.A(0.4), dw.A(0.4))
