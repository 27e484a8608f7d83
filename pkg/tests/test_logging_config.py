import logging

import pytest

from utils.logging_config import MetricsTracker, get_logger, setup_logging


def test_component_loggers_live_under_kgstab():
    assert get_logger("spectral").name == "kgstab.spectral"
    assert get_logger("kgstab.moments").name == "kgstab.moments"
    assert get_logger().name == "kgstab"


def test_setup_twice_keeps_one_console_handler(tmp_path):
    setup_logging("warning")
    root = setup_logging("DEBUG", log_file=str(tmp_path / "run.log"))
    assert root.level == logging.DEBUG
    assert len(root.handlers) == 2
    get_logger("spectral").info("strip search done")
    for handler in root.handlers:
        handler.flush()
    assert "kgstab.spectral - strip search done" in (tmp_path / "run.log").read_text()
    setup_logging("WARNING")


def test_unknown_level_rejected():
    with pytest.raises(ValueError):
        setup_logging("LOUD")


def test_summary_statistics():
    tracker = MetricsTracker()
    tracker.record("picard_iterations", 3, {"mode": "nonlinear_shifted"})
    tracker.record("picard_iterations", 5)
    tracker.record("sweep_time", 1.5)
    summary = tracker.get_summary()
    assert summary["picard_iterations"] == {"count": 2, "average": 4.0, "min": 3.0, "max": 5.0, "total": 8.0}
    assert summary["sweep_time"]["count"] == 1
    assert list(tracker.values("picard_iterations")) == [3.0, 5.0]
    assert tracker.metrics["picard_iterations"][0].tags == {"mode": "nonlinear_shifted"}


def test_reset_forgets_everything():
    tracker = MetricsTracker()
    tracker.record("errors", 1)
    tracker.reset()
    assert tracker.get_summary() == {}
    assert tracker.values("errors").size == 0


def test_average_of_recorded_and_missing_metrics():
    tracker = MetricsTracker()
    tracker.record("simulation_time", 2.0, {"run": "twin"})
    tracker.record("simulation_time", 3.0, {"run": "controlled"})
    assert tracker.get_average("simulation_time") == 2.5
    assert tracker.get_average("sweep_time") == 0.0
    assert tracker.get_summary()["simulation_time"]["average"] == tracker.get_average("simulation_time")
