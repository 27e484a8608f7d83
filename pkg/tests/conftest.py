"""Shared fixtures: project root on sys.path, a small grid and the L=1, a=0.5 pole set."""
import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from solvers.radial_core import RadialGrid  # noqa: E402
from solvers.spectral import asymptotic_line, find_poles_in_strip  # noqa: E402
from solvers.timedomain import default_beta_target  # noqa: E402

L_REF = 1.0
A_REF = 0.5


@pytest.fixture(scope="session")
def beta_inf_ref() -> float:
    return asymptotic_line(L_REF, A_REF)


@pytest.fixture(scope="session")
def beta_ref(beta_inf_ref) -> float:
    """The default open-loop target, 0.4 beta_inf nudged off pole lines."""
    return default_beta_target(L_REF, A_REF)


@pytest.fixture(scope="session")
def poles_ref(beta_ref):
    """Unstable plus sub-beta poles at L=1, a=0.5."""
    return find_poles_in_strip(L_REF, A_REF, beta_ref, 20.0 * math.pi / L_REF)


@pytest.fixture
def small_grid() -> RadialGrid:
    return RadialGrid(L_REF, 201)
