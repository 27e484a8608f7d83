import json

import pandas as pd
import pytest

from cli import build_parser, flag_name, main
from solvers.orchestrator import ScenarioOrchestrator, _sweep_point
from tools.scenario_config import SCENARIO_KEYS, resolve_config
from utils.errors import DegenerateLError


def _poles_args(out_dir, beta_ref):
    return ["poles", "--output-dir", str(out_dir), "--log-level", "WARNING", "--beta-max", repr(beta_ref)]


def _orchestrator(tmp_path):
    return ScenarioOrchestrator(log_level="WARNING", log_file=None, output_dir=str(tmp_path), max_workers=1)


def test_flag_names():
    assert flag_name("beta_max") == "--beta-max"
    assert flag_name("L") == "--L"


def test_parser_accepts_every_key_as_a_flag():
    args = build_parser().parse_args(["verify", "--a", "0.3", "--A", "2", "--T-beta", "8"])
    assert (args.a, args.A, args.T_beta) == ("0.3", "2", "8")
    assert all(getattr(args, key) is None for key in SCENARIO_KEYS if key not in ("a", "A", "T_beta"))


def test_bad_flag_value_exits_with_config_code(tmp_path):
    assert main(["poles", "--output-dir", str(tmp_path), "--a", "1.5"]) == 2
    assert not any(tmp_path.iterdir())


def test_bad_config_file_exits_with_config_code(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("L = 1\nL = 2\n")
    assert main(["poles", "--config", str(config), "--output-dir", str(tmp_path)]) == 2


def test_bad_log_level_exits_with_config_code(tmp_path):
    assert main(["poles", "--output-dir", str(tmp_path), "--log-level", "LOUD"]) == 2


def test_poles_run_writes_table_and_summary(tmp_path, beta_ref, poles_ref):
    assert main(_poles_args(tmp_path, beta_ref)) == 0
    table = pd.read_csv(tmp_path / "poles.csv")
    assert len(table) == len(poles_ref)
    summary = json.loads((tmp_path / "poles_summary.json").read_text())
    assert summary["status"] == "success"
    assert summary["exit_code"] == 0
    assert summary["artifacts"] == ["poles.csv"]
    assert summary["results"]["n_poles"] == len(poles_ref)
    assert summary["config"]["beta_max"] == beta_ref
    assert "pole_search_time" in summary["metrics"]


def test_summary_reproduces_the_run(tmp_path, beta_ref):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(_poles_args(first, beta_ref)) == 0
    assert main(["poles", "--config", str(first / "poles_summary.json"), "--output-dir", str(second),
                 "--log-level", "WARNING"]) == 0
    assert (first / "poles.csv").read_bytes() == (second / "poles.csv").read_bytes()


def test_library_errors_become_error_summaries(tmp_path):
    orchestrator = _orchestrator(tmp_path)

    def degenerate(config):
        raise DegenerateLError("L = tan L")

    orchestrator._handlers["poles"] = degenerate
    result = orchestrator.run(resolve_config("poles"))
    assert result["status"] == "error"
    assert result["exit_code"] == 3
    assert result["error"]["code"] == "spectral.degenerate_l"
    written = json.loads((tmp_path / "poles_summary.json").read_text())
    assert written["error"]["code"] == "spectral.degenerate_l"


def test_value_errors_map_to_invalid_argument(tmp_path):
    orchestrator = _orchestrator(tmp_path)

    def invalid(config):
        raise ValueError("alpha_max must be positive")

    orchestrator._handlers["poles"] = invalid
    result = orchestrator.run(resolve_config("poles"))
    assert result["exit_code"] == 2
    assert result["error"]["code"] == "cli.invalid_argument"


def test_failed_checks_exit_with_numerical_code(tmp_path):
    orchestrator = _orchestrator(tmp_path)
    orchestrator._handlers["verify"] = lambda config: {
        "status": "failed",
        "results": {},
        "artifacts": [],
        "error": {"code": "kernel_verify.check_failed", "error": "1 checks failed: hilbert_zero"},
    }
    result = orchestrator.run(resolve_config("verify"))
    assert result["status"] == "failed"
    assert result["exit_code"] == 3


def test_sweep_point_records_errors():
    row = _sweep_point(4.493409457909064, 0.5, False, 0.4)
    assert row["error"] == "spectral.degenerate_l"
    assert row["beta_inf_scaled"] > 0.0


def test_sweep_point_in_original_coordinates():
    row = _sweep_point(1.0, 0.5, True, 0.4)
    assert row["L_scaled"] == pytest.approx(2.0 ** 0.5)
    assert row["error"] == ""
    assert row["n_poles"] > 0
    assert 0.0 < row["s_max"] < 1.0


@pytest.mark.slow
def test_sweep_scenario(tmp_path):
    config = resolve_config("sweep", flag_values={"sweep_L": "1", "sweep_a": "0.3, 0.5"})
    result = _orchestrator(tmp_path).run(config)
    assert result["exit_code"] == 0
    table = pd.read_csv(tmp_path / "sweep.csv", keep_default_na=False)
    assert list(table["a"]) == [0.3, 0.5]
    assert set(table["error"]) == {""}


@pytest.mark.slow
def test_verify_scenario_passes(tmp_path):
    result = _orchestrator(tmp_path).run(resolve_config("verify"))
    assert result["status"] == "success", result.get("error")
    assert result["exit_code"] == 0
    assert (tmp_path / "verify_checks.csv").exists()
