"""
Error Types for the Stabilization Toolkit

Every numerical or configuration failure raised by the solvers derives from
KgstabError. Each error carries a module-qualified code (e.g.
"spectral.pole_on_line") and the process exit code the cli maps it to.

Exit codes:
- 2: configuration problems (ConfigError)
- 3: numerical failures (everything else)

Usage:
    from utils.errors import PoleOnLineError

    try:
        poles = find_poles_in_strip(L, a, beta_max, alpha_max)
    except PoleOnLineError as e:
        logger.error(f"{e.code}: {e}")
"""
from typing import Any, Optional


class KgstabError(Exception):
    """
    Base class for all toolkit errors.

    Attributes:
        code (str): Module-qualified error code
        exit_code (int): Process exit code used by the cli
        details (dict): Extra structured context for the run summary
    """

    code = "kgstab.error"
    exit_code = 3

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        """Structured form used in orchestrator status dicts."""
        return {"code": self.code, "error": str(self), "details": _plain(self.details)}


def _plain(details: dict) -> dict:
    # Only JSON-friendly scalars survive into summaries
    out = {}
    for key, value in details.items():
        if isinstance(value, complex):
            out[key] = [value.real, value.imag]
        elif isinstance(value, (int, float, str, bool)) or value is None:
            out[key] = value
    return out


# ============================================================================
# Spectral
# ============================================================================

class PoleOnLineError(KgstabError):
    """A pole lies within the margin of the requested decay line."""
    code = "spectral.pole_on_line"


class NonConvergenceError(KgstabError):
    """Newton or the contour subdivision failed to isolate a pole."""
    code = "spectral.non_convergence"


class DegenerateLError(KgstabError):
    """L = tan L: zero is a pole and the problem is excluded."""
    code = "spectral.degenerate_l"


class AtPoleError(KgstabError):
    """The requested frequency is a pole (eta vanishes)."""
    code = "spectral.at_pole"


# ============================================================================
# Greens / moments
# ============================================================================

class InsufficientHistoryError(KgstabError):
    """The recorded trajectory does not cover the required time window."""
    code = "greens.insufficient_history"


class RankDeficientError(KgstabError):
    """The moment matrix has numerical rank below its row count."""
    code = "moments.rank_deficient"


class TargetMismatchError(KgstabError):
    """Moment targets violate conjugate pairing or realness."""
    code = "moments.target_mismatch"


# ============================================================================
# Time domain
# ============================================================================

class BlowupError(KgstabError):
    """
    The discrete solution escaped (max |psi| above the blowup threshold).

    Attributes:
        history: Partial SimulationHistory up to the failing step (may be None)
        period (Optional[int]): Closed-loop period index, when applicable
    """
    code = "timedomain.blowup"

    def __init__(self, message: str, history: Any = None, period: Optional[int] = None, **details: Any):
        super().__init__(message, period=period, **details)
        self.history = history
        self.period = period


class PicardDivergedError(KgstabError):
    """The open-loop fixed-point iteration stopped contracting."""
    code = "timedomain.picard_diverged"


class NonPositiveNormError(KgstabError):
    """A decay fit window contains a numerically zero norm."""
    code = "timedomain.non_positive_norm"


# ============================================================================
# CLI / IO
# ============================================================================

class ConfigError(KgstabError):
    """Scenario configuration could not be parsed or validated."""
    code = "cli.config_error"
    exit_code = 2


class IoError(KgstabError):
    """An artifact could not be read or written."""
    code = "cli.io_error"
