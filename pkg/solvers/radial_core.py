"""
Radial Core: Grids, States, Norms and Energies

Everything in the toolkit works with radial functions on the scaled ball B_L
through the reduction psi = r*u, which turns the 3D radial Laplacian into a
plain second derivative with psi(0) = 0. This module owns that representation:

- RadialGrid: uniform nodes r_i = i*dr on [0, L]
- RadialState: (psi, psi_t) at a time level, plus the previous level for leapfrog restarts
- h1_norm / energy_e0: composite-trapezoid norms and the indefinite energy
- ScalingMap / convert_rate: the sqrt(2) map between the original ball
  B_{L/sqrt2} (coefficient 2 on the focusing term) and the scaled ball B_L

All types are immutable value objects; functions are pure and safe to call from
concurrent sweep workers.
"""
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RadialGrid:
    """
    Uniform radial grid on [0, L] in scaled coordinates.

    Attributes:
        L (float): Ball radius
        n_points (int): Number of nodes (>= 3)

    Example:
        >>> grid = RadialGrid(L=1.0, n_points=5)
        >>> grid.dr
        0.25
    """

    L: float
    n_points: int

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"L must be positive and finite, got {self.L}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError(f"n_points must be an integer >= 3, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def dr(self) -> float:
        return self.L / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        # linspace pins both endpoints exactly
        return np.linspace(0.0, self.L, self.n_points)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n_points)


@dataclass(frozen=True, eq=False)
class RadialState:
    """
    Discretized radial state in psi = r*u form.

    Attributes:
        grid (RadialGrid): Spatial grid
        psi (np.ndarray): psi at the nodes, psi[0] = 0
        psi_t (np.ndarray): time derivative of psi at the nodes, psi_t[0] = 0
        time (float): Time level
        psi_prev (Optional[np.ndarray]): psi one step earlier, kept by the
            leapfrog stepper so a run can be resumed without a restart step
    """

    grid: RadialGrid
    psi: np.ndarray
    psi_t: np.ndarray
    time: float = 0.0
    psi_prev: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        psi_t = np.asarray(self.psi_t, dtype=float)
        n = self.grid.n_points
        if psi.shape != (n,) or psi_t.shape != (n,):
            raise ValueError(f"psi and psi_t must have shape ({n},), got {psi.shape} and {psi_t.shape}")
        if psi[0] != 0.0 or psi_t[0] != 0.0:
            raise ValueError("psi(0) and psi_t(0) must vanish (regularity at the origin)")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "psi_t", psi_t)
        if self.psi_prev is not None:
            object.__setattr__(self, "psi_prev", np.asarray(self.psi_prev, dtype=float))

    @classmethod
    def from_profiles(
        cls,
        grid: RadialGrid,
        u: Callable[[np.ndarray], np.ndarray],
        u_t: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        time: float = 0.0,
    ) -> "RadialState":
        """
        Build a state from radial profiles u(r), u_t(r) (vectorized callables).

        Example:
            >>> grid = RadialGrid(1.0, 101)
            >>> state = RadialState.from_profiles(grid, lambda r: np.ones_like(r))
            >>> float(state.psi[-1])
            1.0
        """
        r = grid.nodes
        psi = r * np.asarray(u(r), dtype=float)
        psi_t = r * np.asarray(u_t(r), dtype=float) if u_t is not None else np.zeros_like(r)
        psi[0] = 0.0
        psi_t[0] = 0.0
        return cls(grid=grid, psi=psi, psi_t=psi_t, time=time)

    @classmethod
    def zero(cls, grid: RadialGrid, time: float = 0.0) -> "RadialState":
        return cls(grid=grid, psi=grid.zeros(), psi_t=grid.zeros(), time=time)

    def u(self) -> np.ndarray:
        """u = psi/r with u(0) taken as the one-sided derivative psi_r(0)."""
        return _divide_by_r(self.psi, self.grid)

    def scaled(self, factor: float) -> "RadialState":
        """Multiply the state (and the stored previous level) by a constant."""
        prev = None if self.psi_prev is None else factor * self.psi_prev
        return replace(self, psi=factor * self.psi, psi_t=factor * self.psi_t, psi_prev=prev)

    def shifted_time(self, time: float) -> "RadialState":
        """Same data at a different time label."""
        return replace(self, time=time)


@dataclass(frozen=True)
class EnergyReport:
    """
    Energy diagnostics at one time level.

    Attributes:
        time (float): Time level
        e0 (float): Indefinite energy
        h1_sq (float): Squared H1-equivalent norm
        e_tilde (float): e0 plus the boundary dissipation accumulated since t = 0
        trace_u (float): u(t, L)
    """

    time: float
    e0: float
    h1_sq: float
    e_tilde: float
    trace_u: float

    @property
    def h1(self) -> float:
        return math.sqrt(self.h1_sq)


class ScalingDirection(enum.Enum):
    ORIGINAL_TO_SCALED = "original_to_scaled"
    SCALED_TO_ORIGINAL = "scaled_to_original"


@dataclass(frozen=True)
class ScalingMap:
    """
    The sqrt(2) change of variables between original and scaled coordinates.

    The scaled solution is u_s(t, x) = u(t/sqrt2, x/sqrt2), so lengths and
    times are multiplied by sqrt(2) going original -> scaled, and decay rates
    are divided by sqrt(2).

    Example:
        >>> to_scaled = ScalingMap(ScalingDirection.ORIGINAL_TO_SCALED)
        >>> round(to_scaled.convert_length(1.0), 6)
        1.414214
    """

    direction: ScalingDirection

    factor_time = SQRT2
    factor_space = SQRT2
    factor_rate = 1.0 / SQRT2

    @property
    def _forward(self) -> bool:
        return self.direction is ScalingDirection.ORIGINAL_TO_SCALED

    def convert_length(self, length: float) -> float:
        return length * self.factor_space if self._forward else length / self.factor_space

    def convert_time(self, t: float) -> float:
        return t * self.factor_time if self._forward else t / self.factor_time

    def convert_rate(self, rate: float) -> float:
        return rate * self.factor_rate if self._forward else rate / self.factor_rate

    def inverse(self) -> "ScalingMap":
        other = (ScalingDirection.SCALED_TO_ORIGINAL if self._forward
                 else ScalingDirection.ORIGINAL_TO_SCALED)
        return ScalingMap(other)


TO_SCALED = ScalingMap(ScalingDirection.ORIGINAL_TO_SCALED)
TO_ORIGINAL = ScalingMap(ScalingDirection.SCALED_TO_ORIGINAL)


# ============================================================================
# Norms and energies
# ============================================================================

def _divide_by_r(psi: np.ndarray, grid: RadialGrid) -> np.ndarray:
    r = grid.nodes
    out = np.empty_like(psi)
    out[1:] = psi[1:] / r[1:]
    out[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * grid.dr)
    return out


def radial_derivative(psi: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Second-order finite-difference psi_r (one-sided at both ends)."""
    return np.gradient(psi, grid.dr, edge_order=2)


def h1_norm(state: RadialState) -> float:
    """
    H1-equivalent norm of a radial state.

    Computes sqrt( int_0^L psi^2 + (psi/r)^2 + psi_t^2 + psi_r^2 dr ) with the
    composite trapezoid rule; psi/r at r = 0 is replaced by psi_r(0).

    Args:
        state (RadialState): State to measure

    Returns:
        float: Nonnegative norm

    Example:
        >>> grid = RadialGrid(1.0, 2001)
        >>> state = RadialState.from_profiles(grid, lambda r: np.ones_like(r))
        >>> round(h1_norm(state), 4)
        1.5275
    """
    psi, psi_t = state.psi, state.psi_t
    psi_r = radial_derivative(psi, state.grid)
    u = _divide_by_r(psi, state.grid)
    integrand = psi ** 2 + u ** 2 + psi_t ** 2 + psi_r ** 2
    return math.sqrt(max(float(trapezoid(integrand, dx=state.grid.dr)), 0.0))


def radial_volume(grid: RadialGrid) -> float:
    """4*pi*int_0^L r^2 dr by the same trapezoid rule as the energies."""
    return 4.0 * math.pi * float(trapezoid(grid.nodes ** 2, dx=grid.dr))


def energy_e0(state: RadialState, potential_coeff: float = 1.0, dissipated: float = 0.0) -> EnergyReport:
    """
    Indefinite energy E0 = 1/2 int (u_t^2 + |grad u|^2 - c u^2) dx of a radial state.

    In psi variables this is 2*pi*[ int (psi_t^2 + psi_r^2 - c psi^2) dr - psi(L)^2/L ].
    Use c = 1 for the scaled equation, c = 2 for original coordinates and
    c = 0 for the free wave.

    Args:
        state (RadialState): State to evaluate
        potential_coeff (float): Coefficient c of the focusing term
        dissipated (float): Boundary dissipation integral accumulated since t = 0

    Returns:
        EnergyReport: e0, h1_sq, e_tilde = e0 + dissipated and the trace u(t, L)
    """
    grid = state.grid
    psi, psi_t = state.psi, state.psi_t
    psi_r = radial_derivative(psi, grid)
    bulk = trapezoid(psi_t ** 2 + psi_r ** 2 - potential_coeff * psi ** 2, dx=grid.dr)
    e0 = 2.0 * math.pi * (float(bulk) - psi[-1] ** 2 / grid.L)
    h1 = h1_norm(state)
    return EnergyReport(
        time=state.time,
        e0=e0,
        h1_sq=h1 * h1,
        e_tilde=e0 + dissipated,
        trace_u=float(psi[-1] / grid.L),
    )


def dissipation_rate(state: RadialState, a: float, b_value: float) -> float:
    """
    Boundary dissipation -(dE0/dt) = (4*pi/a) psi_t(L) (psi_t(L) - L*b).

    Nonnegative when b = 0.
    """
    pt = state.psi_t[-1]
    return 4.0 * math.pi / a * pt * (pt - state.grid.L * b_value)


def shifted_nonlinearity(psi: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """
    r * ((3/2) u^2 + (1/2) u^3) written in psi: (3/2) psi^2/r + (1/2) psi^3/r^2.

    Vanishes at the origin.
    """
    r = grid.nodes
    out = np.zeros_like(psi)
    out[1:] = 1.5 * psi[1:] ** 2 / r[1:] + 0.5 * psi[1:] ** 3 / r[1:] ** 2
    return out


def convert_rate(rate: float, scaling: ScalingMap) -> float:
    """
    Convert a decay rate between scaled and original coordinates.

    Args:
        rate (float): Nonnegative rate
        scaling (ScalingMap): Direction of the conversion

    Returns:
        float: rate*sqrt(2) going scaled -> original, rate/sqrt(2) the other way

    Raises:
        ValueError: If rate is negative
    """
    if rate < 0:
        raise ValueError(f"rate must be nonnegative, got {rate}")
    return scaling.convert_rate(rate)


if __name__ == "__main__":
    grid = RadialGrid(L=1.0, n_points=2001)
    state = RadialState.from_profiles(grid, lambda r: np.ones_like(r))
    print(f"h1_norm(u=1) = {h1_norm(state):.6f} (exact {math.sqrt(7 / 3):.6f})")
    print(energy_e0(state, potential_coeff=2.0))
