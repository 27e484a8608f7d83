import json
import math

import numpy as np
import pandas as pd
import pytest

from tools.export_utils import emit_plots, poles_frame, to_jsonable, write_csv, write_summary
from utils.errors import IoError


def _summary(**overrides):
    summary = {
        "scenario": "poles",
        "status": "success",
        "exit_code": 0,
        "config": {"L": 1.0},
        "results": {},
        "artifacts": [],
        "metrics": {},
    }
    summary.update(overrides)
    return summary


def test_to_jsonable_converts_numeric_types():
    value = {
        "omega": 1.5 - 0.25j,
        "array": np.array([1.0, 2.0]),
        "count": np.int64(3),
        "flag": np.bool_(True),
        "nested": ({"x": np.float32(0.5)},),
        "inf": math.inf,
        1: "key",
    }
    assert to_jsonable(value) == {
        "omega": [1.5, -0.25],
        "array": [1.0, 2.0],
        "count": 3,
        "flag": True,
        "nested": [{"x": 0.5}],
        "inf": "inf",
        "1": "key",
    }


def test_csv_keeps_every_digit(tmp_path):
    value = 0.1 + 0.2
    path = write_csv(pd.DataFrame({"x": [value, math.pi]}), tmp_path / "nested" / "values.csv")
    frame = pd.read_csv(path, float_precision="round_trip")
    assert frame["x"].iloc[0] == value
    assert frame["x"].iloc[1] == math.pi


def test_poles_frame_columns(poles_ref):
    frame = poles_frame(poles_ref)
    assert list(frame.columns) == ["re", "im", "residual", "kind"]
    assert len(frame) == len(poles_ref)


def test_summary_written_sorted_and_validated(tmp_path):
    path = write_summary(_summary(results={"pole": 0.5j}), tmp_path / "poles_summary.json")
    text = path.read_text()
    document = json.loads(text)
    assert document["results"]["pole"] == [0.0, 0.5]
    assert list(document) == sorted(document)
    assert text.endswith("\n")


@pytest.mark.parametrize("overrides", [{"status": "unknown"}, {"exit_code": 1}, {"artifacts": "poles.csv"}])
def test_summary_schema_violations(tmp_path, overrides):
    with pytest.raises(IoError):
        write_summary(_summary(**overrides), tmp_path / "bad.json")
    assert not (tmp_path / "bad.json").exists()


def test_summary_missing_required_key(tmp_path):
    summary = _summary()
    del summary["metrics"]
    with pytest.raises(IoError):
        write_summary(summary, tmp_path / "bad.json")


def test_plots_for_a_standard_history(tmp_path):
    history = tmp_path / "open_loop_history.csv"
    write_csv(pd.DataFrame({"t": [0.0, 1.0], "h1_norm": [1.0, 0.5], "e0": [0.0, 0.0],
                            "trace_u": [0.0, 0.0], "b": [0.0, 0.1]}), history)
    energy, control = emit_plots(history)
    assert energy.name == "open_loop_history_energy.gp"
    assert control.name == "open_loop_history_control.gp"
    assert "using 1:2" in energy.read_text()
    assert "using 1:5" in control.read_text()
    assert "set arrow" not in energy.read_text()


def test_plots_mark_period_boundaries(tmp_path):
    history = tmp_path / "closed_loop_history.csv"
    frame = pd.DataFrame({"t": [0.0, 1.0, 6.0, 7.0, 12.0], "h1_norm": [1.0] * 5, "b": [0.0] * 5,
                          "period": [0, 0, 1, 1, 2]})
    write_csv(frame, history)
    energy, control = emit_plots(history, tmp_path / "plots")
    assert energy.parent == tmp_path / "plots"
    for script in (energy, control):
        assert script.read_text().count("set arrow") == 2


def test_plots_for_an_empty_history(tmp_path):
    history = tmp_path / "empty.csv"
    history.write_text("")
    scripts = emit_plots(history)
    assert len(scripts) == 2
    assert all("plot NaN" in path.read_text() for path in scripts)


def test_plots_for_a_missing_history(tmp_path):
    with pytest.raises(IoError):
        emit_plots(tmp_path / "missing.csv")
