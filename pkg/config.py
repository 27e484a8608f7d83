"""
Configuration Management for the Stabilization Toolkit

This module loads process-level settings from environment variables (and an
optional .env file in the project root). Scenario parameters such as L, a or
the decay target are NOT configured here; they come from the cli's flat
key-value config files (see tools/scenario_config.py).

Environment Variables:
- KGSTAB_THREADS (optional): Max worker processes for the sweep scenario,
  defaults to the CPU count
- LOG_LEVEL (optional): Logging verbosity level, defaults to 'INFO'
- KGSTAB_LOG_FILE (optional): Also write logs to this file
- KGSTAB_OUTPUT_DIR (optional): Default artifact directory, defaults to 'outputs'

Validation:
- Raises ValueError on import if a value is present but unusable

Usage:
    from config import KGSTAB_THREADS, LOG_LEVEL
"""
import logging
import os
from dotenv import load_dotenv
from pathlib import Path

# Load environment variables from .env file in the project root
env_path = Path(__file__).parent / '.env'
load_dotenv(dotenv_path=env_path)

# ============================================================================
# Parallelism
# ============================================================================

# Upper bound on sweep worker processes
# Single runs are strictly sequential and ignore this value
_threads_raw = os.getenv('KGSTAB_THREADS', '').strip()
try:
    KGSTAB_THREADS = int(_threads_raw) if _threads_raw else (os.cpu_count() or 1)
except ValueError:
    raise ValueError(f"KGSTAB_THREADS must be an integer, got {_threads_raw!r}")

# ============================================================================
# Logging Configuration
# ============================================================================

# Options: DEBUG, INFO, WARNING, ERROR, CRITICAL
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

# Optional persistent log file
KGSTAB_LOG_FILE = os.getenv('KGSTAB_LOG_FILE') or None

# ============================================================================
# Artifacts
# ============================================================================

KGSTAB_OUTPUT_DIR = os.getenv('KGSTAB_OUTPUT_DIR', 'outputs')

# ============================================================================
# Validation
# ============================================================================

if KGSTAB_THREADS < 1:
    raise ValueError(f"KGSTAB_THREADS must be >= 1, got {KGSTAB_THREADS}")

if not isinstance(logging.getLevelName(LOG_LEVEL), int):
    raise ValueError(
        f"LOG_LEVEL {LOG_LEVEL!r} is not a logging level. "
        "Use DEBUG, INFO, WARNING, ERROR or CRITICAL."
    )
