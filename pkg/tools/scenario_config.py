"""
Scenario Configuration

Flat `key = value` configuration for the scenario runner. One pair per line,
`#` starts a comment, blank lines are ignored and every key may appear only
once. A JSON run summary is accepted as well: its "config" object is used,
so a summary re-fed as config reproduces the run.

Resolution order (later wins): built-in defaults, config file, command-line
flags. The resolved mapping is validated against SCENARIO_CONFIG_SCHEMA
before any numerics start.

Coordinates:
- scaled (default): L is the scaled ball radius, rates are scaled rates
- original: L is the ball radius R and rates are original rates; the
  runner works with sqrt(2) R and rate / sqrt(2)
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import jsonschema

from solvers.radial_core import TO_SCALED
from utils.errors import ConfigError
from utils.logging_config import get_logger

logger = get_logger("scenario_config")

SCENARIOS = ("poles", "instability", "open-loop", "closed-loop", "verify", "sweep")

TAN_WARNING_TOL = 1e-3

# key -> (type, default, help)
SCENARIO_KEYS: Dict[str, Tuple[str, Any, str]] = {
    "coordinates": ("str", "scaled", "scaled | original"),
    "L": ("float", 1.0, "Ball radius"),
    "a": ("float", 0.5, "Boundary coefficient in (0, 1)"),
    "beta": ("float", None, "Target decay rate (default beta_fraction * beta_inf)"),
    "beta_fraction": ("float", 0.4, "Fraction of beta_inf used when beta is unset"),
    "beta_max": ("float", None, "Upper edge of the pole strip (default 0.9 beta_inf)"),
    "alpha_max": ("float", None, "Frequency cutoff of the pole search (default 20 pi / L)"),
    "n_points": ("int", 2001, "Radial grid nodes"),
    "cfl": ("float", 0.9, "dt / dr"),
    "T_end": ("float", 30.0, "Final time"),
    "record_every": ("int", 10, "Energy report cadence in steps"),
    "mode": ("str", "linearized", "linearized | nonlinear"),
    "profile": ("str", "unstable_mode", "unstable_mode | bump"),
    "epsilon": ("float", 1e-4, "Initial data amplitude"),
    "window_start": ("float", 5.0, "Start of the decay-fit window"),
    "picard_tol": ("float", 1e-8, "Picard tolerance"),
    "max_picard": ("int", 50, "Picard iteration cap"),
    "T_beta": ("float", 6.0, "Closed-loop period"),
    "epsilon0": ("float", None, "Closed-loop rate giveback (default beta / 4)"),
    "n_periods": ("int", 6, "Closed-loop periods"),
    "observer": ("bool", True, "Recompute targets at every period"),
    "kick_period": ("int", None, "Period whose start is kicked"),
    "kick_factor": ("float", 0.1, "Kick size relative to the initial profile"),
    "A": ("float", 1.0, "Frequency cutoff of the tail kernels"),
    "seed": ("int", 0, "Random seed of the verification draws"),
    "sweep_L": ("floats", [0.5, 1.0, 2.0], "L values of the sweep"),
    "sweep_a": ("floats", [0.3, 0.5, 0.9], "a values of the sweep"),
    "plots": ("bool", True, "Write gnuplot scripts"),
}

_JSON_TYPES = {
    "float": {"type": "number"},
    "int": {"type": "integer"},
    "str": {"type": "string"},
    "bool": {"type": "boolean"},
    "floats": {"type": "array", "items": {"type": "number"}, "minItems": 1},
}


def _nullable(schema: dict) -> dict:
    return {"anyOf": [schema, {"type": "null"}]}


def _build_schema() -> dict:
    properties = {}
    for key, (kind, default, _) in SCENARIO_KEYS.items():
        schema = dict(_JSON_TYPES[kind])
        properties[key] = _nullable(schema) if default is None else schema
    properties["coordinates"]["enum"] = ["scaled", "original"]
    properties["mode"]["enum"] = ["linearized", "nonlinear"]
    properties["profile"]["enum"] = ["unstable_mode", "bump"]
    properties["L"]["exclusiveMinimum"] = 0
    properties["a"].update({"exclusiveMinimum": 0, "exclusiveMaximum": 1})
    properties["n_points"]["minimum"] = 3
    properties["cfl"].update({"exclusiveMinimum": 0, "maximum": 0.9})
    properties["T_end"]["exclusiveMinimum"] = 0
    properties["record_every"]["minimum"] = 1
    properties["epsilon"]["minimum"] = 0
    properties["max_picard"]["minimum"] = 1
    properties["T_beta"]["minimum"] = 4
    properties["n_periods"]["minimum"] = 1
    properties["A"]["minimum"] = 1
    return {
        "type": "object",
        "properties": properties,
        "required": list(SCENARIO_KEYS),
        "additionalProperties": False,
    }


SCENARIO_CONFIG_SCHEMA = _build_schema()


# ============================================================================
# Parsing
# ============================================================================

def _coerce(key: str, raw: Any, source: str) -> Any:
    """Type a raw value (string from a file or flag, or a JSON value) for key."""
    if key not in SCENARIO_KEYS:
        raise ConfigError(f"{source}: unknown key {key!r}", key=key)
    kind, default, _ = SCENARIO_KEYS[key]
    if raw is None:
        return None
    if not isinstance(raw, str):
        if kind == "floats" and isinstance(raw, (list, tuple)):
            return [float(v) for v in raw]
        if kind == "float" and isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return float(raw)
        return raw
    text = raw.strip()
    if text.lower() in ("", "none", "null"):
        if default is not None:
            raise ConfigError(f"{source}: {key} may not be empty", key=key)
        return None
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind == "bool":
            lowered = text.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if kind == "floats":
            return [float(part) for part in text.split(",") if part.strip()]
        return text
    except ValueError:
        raise ConfigError(f"{source}: cannot read {key} = {text!r} as {kind}", key=key)


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    """
    Parse flat `key = value` text into typed values.

    Raises:
        ConfigError: On malformed lines, unknown or duplicate keys, or untyped values

    Example:
        >>> parse_config_text("L = 2  # radius\\na = 0.3")
        {'L': 2.0, 'a': 0.3}
    """
    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {content!r}", line=number)
        key, raw = (part.strip() for part in content.split("=", 1))
        if key in values:
            raise ConfigError(f"{source}:{number}: duplicate key {key!r}", line=number, key=key)
        values[key] = _coerce(key, raw, f"{source}:{number}")
    return values


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat config file or a JSON run summary.

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    file_path = Path(path)
    try:
        text = file_path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}", path=str(path))
    if file_path.suffix.lower() != ".json":
        return parse_config_text(text, source=str(path))
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})", path=str(path))
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: expected a JSON object", path=str(path))
    document = document.get("config", document)
    return {key: _coerce(key, value, str(path)) for key, value in document.items() if key != "scenario"}


# ============================================================================
# Resolution
# ============================================================================

@dataclass(frozen=True)
class ScenarioConfig:
    """
    Resolved, validated scenario configuration.

    Attributes:
        scenario (str): Scenario name
        values (Dict[str, Any]): Every key of SCENARIO_KEYS, user coordinates
    """

    scenario: str
    values: Dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @property
    def original(self) -> bool:
        return self.values["coordinates"] == "original"

    def length(self, value: Optional[float] = None) -> float:
        """A user length (default L) in scaled coordinates."""
        value = self.values["L"] if value is None else value
        return TO_SCALED.convert_length(value) if self.original else value

    def rate(self, key: str) -> Optional[float]:
        """A user rate in scaled coordinates (None stays None)."""
        value = self.values[key]
        if value is None or not self.original:
            return value
        return TO_SCALED.convert_rate(value)

    def time(self, key: str) -> float:
        value = self.values[key]
        return TO_SCALED.convert_time(value) if self.original else value

    def to_dict(self) -> Dict[str, Any]:
        return {"scenario": self.scenario, **self.values}


def resolve_config(scenario: str, file_values: Optional[Mapping[str, Any]] = None,
                   flag_values: Optional[Mapping[str, Any]] = None) -> ScenarioConfig:
    """
    Merge defaults, file values and flags (flags win), then validate.

    Flags whose value is None are treated as not given.

    Raises:
        ConfigError: On an unknown scenario, a schema violation or a domain violation
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"Unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    values = {key: default for key, (_, default, _) in SCENARIO_KEYS.items()}
    for key, value in (file_values or {}).items():
        values[key] = _coerce(key, value, "config")
    for key, value in (flag_values or {}).items():
        if value is not None:
            values[key] = _coerce(key, value, "flag")

    try:
        jsonschema.validate(instance=values, schema=SCENARIO_CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        location = ".".join(str(part) for part in e.absolute_path) or "config"
        raise ConfigError(f"Invalid configuration at {location}: {e.message}", key=location)

    config = ScenarioConfig(scenario=scenario, values=values)
    _check_domain(config)
    return config


def _check_domain(config: ScenarioConfig) -> None:
    L = config.length()
    if abs(L - math.tan(L)) < TAN_WARNING_TOL:
        logger.warning(f"L = {L:.8g} (scaled) is close to a root of L = tan L; poles near 0 are ill-conditioned")
    beta = config.rate("beta")
    if beta is not None:
        beta_inf = math.log((1.0 + config["a"]) / (1.0 - config["a"])) / (2.0 * L)
        if not (0.0 < beta < beta_inf):
            raise ConfigError(f"beta must lie in (0, beta_inf = {beta_inf:.6g}) in scaled coordinates, got {beta:.6g}",
                              key="beta")
    if config["kick_period"] is not None and not (0 <= config["kick_period"] < config["n_periods"]):
        raise ConfigError("kick_period must index one of the n_periods periods", key="kick_period")
    if config["T_end"] < 4.0 and config.scenario == "open-loop":
        raise ConfigError("T_end must be >= 4 for controlled runs", key="T_end")
    if config.scenario == "sweep":
        for value in config["sweep_a"]:
            if not 0.0 < value < 1.0:
                raise ConfigError(f"sweep_a values must lie in (0, 1), got {value}", key="sweep_a")
        for value in config["sweep_L"]:
            if not value > 0.0:
                raise ConfigError(f"sweep_L values must be positive, got {value}", key="sweep_L")
