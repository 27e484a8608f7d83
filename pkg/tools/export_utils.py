"""
Artifact Export Utilities

CSV tables, JSON run summaries and gnuplot scripts for scenario runs.

- CSV: comma separated, header row, 17 significant digits (lossless doubles)
- JSON: validated against RUN_SUMMARY_SCHEMA, indent 2, sorted keys,
  complex numbers stored as [re, im]
- gnuplot: plain scripts next to the history CSV they plot
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import numpy as np
import pandas as pd

from solvers.spectral import Pole
from utils.errors import IoError
from utils.logging_config import get_logger

logger = get_logger("export_utils")

CSV_FLOAT_FORMAT = "%.17g"

RUN_SUMMARY_SCHEMA = {
    "type": "object",
    "properties": {
        "scenario": {"type": "string"},
        "status": {"enum": ["success", "diverged", "failed", "error"]},
        "exit_code": {"type": "integer", "enum": [0, 2, 3]},
        "config": {"type": "object"},
        "results": {"type": "object"},
        "artifacts": {"type": "array", "items": {"type": "string"}},
        "metrics": {"type": "object"},
        "error": {
            "type": "object",
            "properties": {
                "code": {"type": "string"},
                "error": {"type": "string"},
                "details": {"type": "object"},
            },
            "required": ["code", "error"],
        },
    },
    "required": ["scenario", "status", "exit_code", "config", "results", "artifacts", "metrics"],
}


def complex_pair(value: complex) -> List[float]:
    """[re, im] for JSON."""
    value = complex(value)
    return [value.real, value.imag]


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays, complex numbers and non-finite floats."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return complex_pair(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def poles_frame(poles: Sequence[Pole]) -> pd.DataFrame:
    """Pole table with columns re, im, residual, kind."""
    return pd.DataFrame({
        "re": [p.omega.real for p in poles],
        "im": [p.omega.imag for p in poles],
        "residual": [p.char_residual for p in poles],
        "kind": [p.kind.value for p in poles],
    })


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """
    Write a table with 17 significant digits.

    Raises:
        IoError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, float_format=CSV_FLOAT_FORMAT, index=False)
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}", path=str(path))
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_summary(summary: Dict[str, Any], path: Path) -> Path:
    """
    Validate and write a run summary.

    Raises:
        IoError: If the summary violates RUN_SUMMARY_SCHEMA or cannot be written
    """
    path = Path(path)
    document = to_jsonable(summary)
    try:
        jsonschema.validate(instance=document, schema=RUN_SUMMARY_SCHEMA)
    except jsonschema.ValidationError as e:
        raise IoError(f"Run summary does not match its schema: {e.message}", path=str(path))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}", path=str(path))
    return path


# ============================================================================
# gnuplot
# ============================================================================

def _period_markers(frame: pd.DataFrame) -> List[str]:
    if "period" not in frame.columns or frame.empty:
        return []
    starts = frame.groupby("period")["t"].min().sort_index()
    return [f"set arrow from {float(t):.17g}, graph 0 to {float(t):.17g}, graph 1 nohead dashtype 2 lc rgb 'gray'"
            for t in starts.iloc[1:]]


def emit_plots(history_csv: Path, out_dir: Optional[Path] = None) -> List[Path]:
    """
    Write gnuplot scripts for a history CSV: log h1 vs t and b(t) vs t.

    Closed-loop histories (with a period column) get dashed markers at the
    period boundaries. An empty history still produces a script, with a
    warning, so downstream tooling finds the files it expects.

    Args:
        history_csv (Path): CSV with columns t, h1_norm, b (and optionally period)
        out_dir (Path): Directory for the scripts (default: next to the CSV)

    Returns:
        List[Path]: Written script paths

    Raises:
        IoError: If the CSV cannot be read or a script cannot be written
    """
    history_csv = Path(history_csv)
    out_dir = history_csv.parent if out_dir is None else Path(out_dir)
    try:
        frame = pd.read_csv(history_csv)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=["t", "h1_norm", "b"])
    except (OSError, pd.errors.ParserError) as e:
        raise IoError(f"Cannot read history {history_csv}: {e}", path=str(history_csv))

    stem = history_csv.stem
    data = history_csv.name
    markers = _period_markers(frame)
    scripts = {
        f"{stem}_energy.gp": [
            "set terminal pngcairo size 900,600",
            f"set output '{stem}_energy.png'",
            "set xlabel 't'",
            "set ylabel 'h1 norm'",
            "set logscale y",
            "set datafile separator ','",
            *markers,
        ],
        f"{stem}_control.gp": [
            "set terminal pngcairo size 900,600",
            f"set output '{stem}_control.png'",
            "set xlabel 't'",
            "set ylabel 'b(t)'",
            "set datafile separator ','",
            *markers,
        ],
    }
    if frame.empty:
        logger.warning(f"History {history_csv} is empty; writing empty plot scripts")
        scripts[f"{stem}_energy.gp"].append("# empty history\nplot NaN notitle")
        scripts[f"{stem}_control.gp"].append("# empty history\nplot NaN notitle")
    else:
        scripts[f"{stem}_energy.gp"].append(
            f"plot '{data}' using 1:2 skip 1 with lines title 'h1'")
        b_column = list(frame.columns).index("b") + 1
        scripts[f"{stem}_control.gp"].append(
            f"plot '{data}' using 1:{b_column} skip 1 with lines title 'b'")

    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, lines in scripts.items():
            path = out_dir / name
            path.write_text("\n".join(lines) + "\n")
            written.append(path)
    except OSError as e:
        raise IoError(f"Cannot write plot scripts to {out_dir}: {e}", path=str(out_dir))
    return written
