import json
import math

import pytest

from tools.scenario_config import (
    SCENARIO_CONFIG_SCHEMA,
    SCENARIO_KEYS,
    load_config_file,
    parse_config_text,
    resolve_config,
)
from utils.errors import ConfigError


def test_parse_types_comments_and_blank_lines():
    text = """
    # reference run
    L = 2          # radius
    n_points = 401
    mode = nonlinear
    observer = no
    sweep_a = 0.3, 0.6
    beta = none
    """
    values = parse_config_text(text)
    assert values == {
        "L": 2.0,
        "n_points": 401,
        "mode": "nonlinear",
        "observer": False,
        "sweep_a": [0.3, 0.6],
        "beta": None,
    }


@pytest.mark.parametrize("text, message", [
    ("L = 1\nL = 2", "duplicate"),
    ("radius = 1", "unknown key"),
    ("L 1", "expected 'key = value'"),
    ("n_points = 1.5", "as int"),
    ("observer = maybe", "as bool"),
    ("L =", "may not be empty"),
])
def test_parse_errors(text, message):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text, source="run.cfg")
    assert message in str(info.value)
    assert info.value.exit_code == 2


def test_parse_error_reports_line_number():
    with pytest.raises(ConfigError) as info:
        parse_config_text("a = 0.5\n\nL = x")
    assert "<config>:3" in str(info.value)
    assert info.value.details["line"] == 3


def test_defaults_resolve_and_validate():
    config = resolve_config("poles")
    assert set(config.values) == set(SCENARIO_KEYS)
    assert config["L"] == 1.0
    assert config.rate("beta") is None
    assert config.to_dict()["scenario"] == "poles"
    assert SCENARIO_CONFIG_SCHEMA["additionalProperties"] is False


def test_flags_win_over_file_values():
    config = resolve_config("poles", {"L": 2.0, "a": 0.3}, {"L": "3", "a": None})
    assert config["L"] == 3.0
    assert config["a"] == 0.3


@pytest.mark.parametrize("flags", [
    {"a": "1.5"},
    {"a": "0"},
    {"L": "-1"},
    {"cfl": "0.95"},
    {"mode": "cubic"},
    {"coordinates": "polar"},
    {"T_beta": "3"},
    {"n_points": "2"},
])
def test_schema_violations(flags):
    with pytest.raises(ConfigError) as info:
        resolve_config("open-loop", flag_values=flags)
    assert info.value.code == "cli.config_error"


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError):
        resolve_config("heat")


def test_beta_must_lie_below_the_asymptotic_line():
    beta_inf = math.log(3.0) / 2.0
    resolve_config("open-loop", flag_values={"beta": str(0.5 * beta_inf)})
    for beta in (beta_inf, 1.0):
        with pytest.raises(ConfigError) as info:
            resolve_config("open-loop", flag_values={"beta": str(beta)})
        assert info.value.details["key"] == "beta"


def test_open_loop_needs_room_for_the_control():
    with pytest.raises(ConfigError):
        resolve_config("open-loop", flag_values={"T_end": "3"})
    assert resolve_config("instability", flag_values={"T_end": "3"})["T_end"] == 3.0


def test_kick_period_must_index_a_period():
    with pytest.raises(ConfigError):
        resolve_config("closed-loop", flag_values={"kick_period": "6"})
    assert resolve_config("closed-loop", flag_values={"kick_period": "5"})["kick_period"] == 5


def test_sweep_values_checked():
    with pytest.raises(ConfigError):
        resolve_config("sweep", flag_values={"sweep_a": "0.5, 1.2"})
    with pytest.raises(ConfigError):
        resolve_config("sweep", flag_values={"sweep_L": "1, 0"})


def test_original_coordinates_convert_to_scaled():
    config = resolve_config("poles", flag_values={"coordinates": "original", "L": "1", "T_end": "10",
                                                  "beta": "0.1"})
    assert config.original
    assert config.length() == pytest.approx(math.sqrt(2.0))
    assert config.time("T_end") == pytest.approx(10.0 * math.sqrt(2.0))
    assert config.rate("beta") == pytest.approx(0.1 / math.sqrt(2.0))


def test_beta_range_checked_in_scaled_coordinates():
    # original R = 1 is scaled L = sqrt 2, where beta_inf = log 3 / (2 sqrt 2) ~ 0.388;
    # an original rate of 0.5 scales to ~0.354 and is admissible
    config = resolve_config("open-loop", flag_values={"coordinates": "original", "beta": "0.5"})
    assert config.rate("beta") == pytest.approx(0.5 / math.sqrt(2.0))


def test_load_flat_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("L = 1.5\na = 0.4\n")
    assert load_config_file(str(path)) == {"L": 1.5, "a": 0.4}


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "missing.cfg"))


def test_load_summary_json(tmp_path):
    path = tmp_path / "poles_summary.json"
    path.write_text(json.dumps({"scenario": "poles", "status": "success",
                                "config": {"L": 2, "beta": None, "sweep_L": [1, 2]}}))
    assert load_config_file(str(path)) == {"L": 2.0, "beta": None, "sweep_L": [1.0, 2.0]}


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"config": {"radius": 1}}'])
def test_load_bad_json(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(ConfigError):
        load_config_file(str(path))
