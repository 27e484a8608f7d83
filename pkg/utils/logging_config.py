"""
Logging and run metrics for kgstab.

All loggers hang below "kgstab" (kgstab.spectral, kgstab.timedomain, ...),
so one setup_logging() call from the CLI or the orchestrator configures
every solver at once. Log lines go to stderr; stdout stays free for
whatever a scenario prints.

The metrics tracker collects stage timings and iteration counts for the
current scenario. Its summary is written into <scenario>_summary.json.

Usage:
    from utils.logging_config import setup_logging, get_logger, metrics_tracker

    setup_logging(level="INFO", log_file="run.log")
    log = get_logger("spectral")
    log.info("strip search: 12 poles below beta=0.40")

    metrics_tracker.record("pole_search_time", 0.41, {"L": 1.0, "a": 0.5})
    metrics_tracker.get_summary()["pole_search_time"]["count"]
"""
import logging
import sys
import threading
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np

ROOT_LOGGER_NAME = "kgstab"

LOG_FORMAT = '[%(asctime)s] %(levelname)-8s - %(name)s - %(message)s'
LOG_DATEFMT = '%Y-%m-%d %H:%M:%S'

# ANSI codes per level; only used on a terminal
LEVEL_COLORS = {
    'DEBUG': '\033[36m',
    'INFO': '\033[32m',
    'WARNING': '\033[33m',
    'ERROR': '\033[31m',
    'CRITICAL': '\033[91m',
}
_RESET = '\033[0m'


class ColoredFormatter(logging.Formatter):
    """Formatter that tints the level name when writing to a TTY."""

    def __init__(self, use_color: bool = False):
        super().__init__(fmt=LOG_FORMAT, datefmt=LOG_DATEFMT)
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        if not self.use_color:
            return super().format(record)
        plain = record.levelname
        record.levelname = f"{LEVEL_COLORS.get(plain, '')}{plain}{_RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = plain


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """
    Configure the "kgstab" logger and return it.

    Calling it again replaces the previous handlers, so a process that runs
    several scenarios keeps a single console stream.

    Args:
        level (str): Level name, case-insensitive ("debug", "INFO", ...)
        log_file (Optional[str]): Also append plain log lines to this file

    Raises:
        ValueError: If level is not a logging level name
    """
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        raise ValueError(f"Unknown log level: {level}")

    root = logging.getLogger(ROOT_LOGGER_NAME)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(numeric_level)
    root.propagate = False

    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(ColoredFormatter(use_color=sys.stderr.isatty()))
    root.addHandler(stream)

    if log_file:
        sink = logging.FileHandler(log_file)
        sink.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
        root.addHandler(sink)

    return root


def get_logger(name: str = ROOT_LOGGER_NAME) -> logging.Logger:
    """Logger for a component; "spectral" becomes "kgstab.spectral"."""
    if name == ROOT_LOGGER_NAME or name.startswith(ROOT_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


@dataclass(frozen=True)
class MetricSample:
    """One recorded value of a run metric."""
    value: float
    recorded_at: datetime
    tags: Dict[str, Any] = field(default_factory=dict)


class MetricsTracker:
    """
    Per-scenario store of timings and counters.

    Samples are grouped by metric name. The lock only matters for threads in
    one process; sweep workers run in separate processes and each record into
    their own tracker, which the parent never sees.

    Example:
        >>> tracker = MetricsTracker()
        >>> tracker.record("picard_iterations", 3)
        >>> tracker.record("picard_iterations", 5)
        >>> tracker.get_average("picard_iterations")
        4.0
    """

    def __init__(self):
        self.metrics: Dict[str, List[MetricSample]] = {}
        self._lock = threading.Lock()

    def record(self, metric_name: str, value: float, tags: Optional[Dict[str, Any]] = None) -> None:
        """Append a sample; tags say which run or parameters it came from."""
        sample = MetricSample(float(value), datetime.now(), dict(tags or {}))
        with self._lock:
            self.metrics.setdefault(metric_name, []).append(sample)
        get_logger("metrics").debug(f"{metric_name} = {sample.value:.4g} {sample.tags or ''}")

    def values(self, metric_name: str) -> np.ndarray:
        """Recorded values of one metric in recording order."""
        with self._lock:
            samples = list(self.metrics.get(metric_name, []))
        return np.array([s.value for s in samples], dtype=float)

    def get_average(self, metric_name: str) -> float:
        """Mean of a metric, 0.0 if it was never recorded."""
        v = self.values(metric_name)
        return float(v.mean()) if v.size else 0.0

    def get_summary(self) -> Dict[str, Dict[str, float]]:
        """count, average, min, max and total for every metric with samples."""
        with self._lock:
            names = [name for name, samples in self.metrics.items() if samples]
        summary = {}
        for name in names:
            v = self.values(name)
            summary[name] = {
                "count": int(v.size),
                "average": self.get_average(name),
                "min": float(v.min()),
                "max": float(v.max()),
                "total": float(v.sum()),
            }
        return summary

    def reset(self) -> None:
        """Forget everything; the orchestrator calls this before each scenario."""
        with self._lock:
            self.metrics = {}


metrics_tracker = MetricsTracker()


if __name__ == "__main__":
    setup_logging(level="DEBUG")
    get_logger("spectral").info("strip search started")
    get_logger("timedomain").warning("CFL close to the stability limit")

    metrics_tracker.record("pole_search_time", 0.42, {"L": 1.0})
    metrics_tracker.record("pole_search_time", 0.38, {"L": 2.0})
    for name, stats in metrics_tracker.get_summary().items():
        print(name, stats)
