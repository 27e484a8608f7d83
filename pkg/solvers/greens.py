"""
Green's Function, Elliptic Solves and Pole Compatibility

For a non-pole frequency w the boundary problem

    psi'' + (1 + w^2) psi = F  on (0, L),   psi(0) = 0,
    (iLw - a) psi(L) + aL psi'(L) = L^2 B

is solved with the Green's function Gamma(r, s) = phi1(min) phi2(max) / c_g built
from phi1 = i sin(<w>r) and phi2 = i sin(<w>r) + eta cos(<w>r). At a pole the
problem is solvable only for compatible data; pole_compatibility computes the
boundary moment r_target that the control must supply for that to hold.

The time-domain side enters through fourier_source / FourierAccumulator, which
turn a trajectory into the transformed source F(w, r) and boundary datum B(w):

    F = -int e^{-iwt} [ (2iw chi_t - chi_tt) psi + chi * r h ] dt
    B =  int e^{-iwt} chi_t u(t, L) dt

(the 2 chi_t psi_t term is integrated by parts so no time derivative is needed).
"""
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from solvers.radial_core import RadialGrid, RadialState, shifted_nonlinearity
from solvers.spectral import Frequency, Pole, eta_value
from utils.errors import AtPoleError, InsufficientHistoryError
from utils.logging_config import get_logger

logger = get_logger("greens")

AT_POLE_TOL = 1e-12


# ============================================================================
# Time cutoff
# ============================================================================

def _bump_pieces(x: np.ndarray):
    # f(x) = exp(-1/x) for x > 0 with first and second derivatives;
    # below 1/700 the exponential underflows and everything is exactly 0
    x = np.asarray(x, dtype=float)
    f = np.zeros_like(x)
    df = np.zeros_like(x)
    d2f = np.zeros_like(x)
    live = x > 1.0 / 700.0
    xl = x[live]
    fl = np.exp(-1.0 / xl)
    f[live] = fl
    df[live] = fl / xl ** 2
    d2f[live] = fl * (1.0 / xl ** 4 - 2.0 / xl ** 3)
    return f, df, d2f


@dataclass(frozen=True)
class SmoothCutoff:
    """
    C-infinity cutoff chi(t) = sigma(t - start), 0 for t <= start, 1 for t >= start + 1.

    sigma(x) = f(x) / (f(x) + f(1 - x)) with f(x) = exp(-1/x).
    """

    start: float = 1.0

    def _parts(self, t):
        x = np.asarray(t, dtype=float) - self.start
        f, df, d2f = _bump_pieces(x)
        g, dg_raw, d2g = _bump_pieces(1.0 - x)
        dg = -dg_raw
        total = f + g
        inside = total > 0
        safe = np.where(inside, total, 1.0)
        return x, f, df, d2f, g, dg, d2g, safe, inside

    def value(self, t):
        x, f, _, _, _, _, _, safe, inside = self._parts(t)
        out = np.where(inside, f / safe, np.where(x >= 0.5, 1.0, 0.0))
        return out if out.ndim else float(out)

    def d1(self, t):
        _, f, df, _, g, dg, _, safe, inside = self._parts(t)
        out = np.where(inside, (df * g - f * dg) / safe ** 2, 0.0)
        return out if out.ndim else float(out)

    def d2(self, t):
        _, f, df, d2f, g, dg, d2g, safe, inside = self._parts(t)
        first = (df * g - f * dg)
        out = np.where(inside, (d2f * g - f * d2g) / safe ** 2 - 2.0 * first * (df + dg) / safe ** 3, 0.0)
        return out if out.ndim else float(out)


STANDARD_CUTOFF = SmoothCutoff(start=1.0)


# ============================================================================
# Data types
# ============================================================================

@dataclass(frozen=True, eq=False)
class SourceData:
    """
    Transformed source for one frequency.

    Attributes:
        grid (RadialGrid): Grid the source is sampled on
        F (np.ndarray): Complex F(r) = r f(r) on the grid, F[0] = 0
        B (complex): Transformed boundary datum
        description (str): Origin of the data
    """

    grid: RadialGrid
    F: np.ndarray
    B: complex = 0j
    description: str = "h0 = chi_tt u + 2 chi_t u_t + chi h; b0 = chi b + chi_t u"

    def __post_init__(self):
        F = np.asarray(self.F, dtype=complex)
        if F.shape != (self.grid.n_points,):
            raise ValueError(f"F must have shape ({self.grid.n_points},), got {F.shape}")
        if F[0] != 0:
            raise ValueError("F must vanish at r = 0")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "B", complex(self.B))

    def combine(self, factor: complex, other: "SourceData") -> "SourceData":
        """factor * self + other."""
        return SourceData(self.grid, factor * self.F + other.F, factor * self.B + other.B, "combination")


@dataclass(frozen=True)
class PoleTarget:
    """
    Control moment required at a pole.

    Attributes:
        pole (Pole): The pole
        l_value (complex): (iLw - a) psi(L) + aL psi'(L) of the IVP solution
        r_target (complex): l_value / L^2 - B, the moment int e^{-iwt} b(t) dt must equal
    """

    pole: Pole
    l_value: complex
    r_target: complex


@dataclass(frozen=True)
class GreensKernel:
    """
    Green's function data at a non-pole frequency.

    Attributes:
        freq (Frequency): Frequency and bracket root
        eta (complex): Boundary coefficient of phi2
        cg (complex): Wronskian phi1 phi2' - phi1' phi2 = -i<w> eta
        L, a (float): Problem parameters
    """

    freq: Frequency
    eta: complex
    cg: complex
    L: float
    a: float

    @property
    def z(self) -> complex:
        return self.freq.bracket

    def phi1_at(self, r):
        return 1j * np.sin(self.z * np.asarray(r))

    def phi2_at(self, r):
        zr = self.z * np.asarray(r)
        return 1j * np.sin(zr) + self.eta * np.cos(zr)

    def dphi1_at(self, r):
        return 1j * self.z * np.cos(self.z * np.asarray(r))

    def dphi2_at(self, r):
        zr = self.z * np.asarray(r)
        return self.z * (1j * np.cos(zr) - self.eta * np.sin(zr))

    def gamma(self, r, s):
        """Gamma(r, s) = phi1(min(r, s)) phi2(max(r, s)) / c_g (broadcasting)."""
        r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
        lo, hi = np.minimum(r, s), np.maximum(r, s)
        return self.phi1_at(lo) * self.phi2_at(hi) / self.cg

    def boundary_residual(self) -> complex:
        """(iLw - a) phi2(L) + aL phi2'(L), zero up to rounding."""
        p = 1j * self.L * self.freq.omega - self.a
        return p * self.phi2_at(self.L) + self.a * self.L * self.dphi2_at(self.L)


def build_kernel(omega: complex, L: float, a: float) -> GreensKernel:
    """
    Green's function kernel at w.

    Raises:
        AtPoleError: If |eta| <= 1e-12
        ValueError: At w = +-i, where phi1 vanishes identically
    """
    freq = Frequency.from_omega(omega)
    if abs(freq.bracket) < 1e-12:
        raise ValueError(f"w = {omega}: <w> = 0, the sine solution degenerates")
    eta = eta_value(freq.omega, L, a)
    if not np.isfinite(eta) or abs(eta) <= AT_POLE_TOL:
        raise AtPoleError(f"w = {omega} is a pole (|eta| = {abs(eta):.3e})", omega=complex(omega))
    return GreensKernel(freq=freq, eta=eta, cg=-1j * freq.bracket * eta, L=L, a=a)


# ============================================================================
# Elliptic solves
# ============================================================================

def _boundary_lift(grid: RadialGrid):
    # l(r) = r^3/L^2 - r^2/L: l(0) = l(L) = 0, l'(L) = 1
    r, L = grid.nodes, grid.L
    lift = r ** 3 / L ** 2 - r ** 2 / L
    lift_rr = 6.0 * r / L ** 2 - 2.0 / L
    return lift, lift_rr


def resolve_elliptic(omega: complex, source: SourceData, L: float, a: float) -> np.ndarray:
    """
    Solve psi'' + (1 + w^2) psi = F, psi(0) = 0, (iLw - a) psi(L) + aL psi'(L) = L^2 B.

    The boundary datum is moved into the source with a cubic lift vanishing at
    both ends; the remaining homogeneous problem is a Green's-function
    convolution evaluated by cumulative trapezoid sums.

    Args:
        omega (complex): Non-pole frequency
        source (SourceData): F on the grid and B
        L (float): Radius (must match the source grid)
        a (float): Boundary coefficient

    Returns:
        np.ndarray: Complex psi on the grid

    Raises:
        AtPoleError: If w is a pole
    """
    grid = source.grid
    if not math.isclose(grid.L, L, rel_tol=1e-12):
        raise ValueError(f"Source grid radius {grid.L} does not match L = {L}")
    kernel = build_kernel(omega, L, a)
    k2 = 1.0 + complex(omega) ** 2
    r = grid.nodes

    lift_coeff = L * source.B / a
    lift, lift_rr = _boundary_lift(grid)
    rhs = source.F - lift_coeff * (lift_rr + k2 * lift)

    phi1, phi2 = kernel.phi1_at(r), kernel.phi2_at(r)
    inner = cumulative_trapezoid(phi1 * rhs, r, initial=0.0)
    outer_cum = cumulative_trapezoid(phi2 * rhs, r, initial=0.0)
    outer = outer_cum[-1] - outer_cum
    psi = (phi2 * inner + phi1 * outer) / kernel.cg + lift_coeff * lift
    psi[0] = 0.0
    return psi


def _banded_bvp(omega: complex, grid: RadialGrid, a: float):
    # tridiagonal rows for nodes 1..N, ghost-node Robin row at N
    n_unknowns = grid.n_points - 1
    dr, L = grid.dr, grid.L
    k2 = 1.0 + complex(omega) ** 2
    p = 1j * L * complex(omega) - a
    inv = 1.0 / dr ** 2
    upper = np.full(n_unknowns, inv, dtype=complex)
    diag = np.full(n_unknowns, -2.0 * inv + k2, dtype=complex)
    lower = np.full(n_unknowns, inv, dtype=complex)
    diag[-1] = -2.0 * inv - 2.0 * p / (a * L * dr) + k2
    lower[-1] = 2.0 * inv  # coefficient of psi_{N-1} in the last row
    return lower, diag, upper


def bvp_matrix(omega: complex, grid: RadialGrid, a: float) -> np.ndarray:
    """Dense second-order FD operator of the boundary problem (unknowns psi_1..psi_N)."""
    lower, diag, upper = _banded_bvp(omega, grid, a)
    matrix = np.diag(diag)
    matrix += np.diag(upper[:-1], 1)
    matrix += np.diag(lower[1:], -1)
    return matrix


def solve_direct_bvp(omega: complex, source: SourceData, L: float, a: float) -> np.ndarray:
    """
    Independent second-order finite-difference solve with a ghost-node Robin row.

    Returns:
        np.ndarray: Complex psi on the grid (psi[0] = 0)
    """
    grid = source.grid
    lower, diag, upper = _banded_bvp(omega, grid, a)
    ab = np.zeros((3, diag.size), dtype=complex)
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    rhs = source.F[1:].astype(complex).copy()
    rhs[-1] -= 2.0 * L * source.B / (a * grid.dr)
    psi = np.zeros(grid.n_points, dtype=complex)
    psi[1:] = solve_banded((1, 1), ab, rhs)
    return psi


# ============================================================================
# Compatibility at poles
# ============================================================================

def _ivp_rk4(k2: complex, source: SourceData):
    grid = source.grid
    r, h = grid.nodes, grid.dr
    stacked = np.column_stack([source.F.real, source.F.imag])
    spline = CubicSpline(r, stacked, axis=0)
    mids = spline(r[:-1] + 0.5 * h)
    f_mid = mids[:, 0] + 1j * mids[:, 1]
    f_node = source.F

    psi, dpsi = 0j, 0j
    for i in range(grid.n_points - 1):
        fa, fm, fb = f_node[i], f_mid[i], f_node[i + 1]
        k1p, k1d = dpsi, fa - k2 * psi
        p2, d2 = psi + 0.5 * h * k1p, dpsi + 0.5 * h * k1d
        k2p, k2d = d2, fm - k2 * p2
        p3, d3 = psi + 0.5 * h * k2p, dpsi + 0.5 * h * k2d
        k3p, k3d = d3, fm - k2 * p3
        p4, d4 = psi + h * k3p, dpsi + h * k3d
        k4p, k4d = d4, fb - k2 * p4
        psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        dpsi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
    return psi, dpsi


def pole_compatibility(pole: Pole, source: SourceData, L: float, a: float) -> PoleTarget:
    """
    Control moment that makes the boundary problem solvable at a pole.

    Integrates psi'' + (1 + w_j^2) psi = F with psi(0) = psi'(0) = 0 by classical
    RK4 (source midpoints from a cubic spline), then
    l = (iLw_j - a) psi(L) + aL psi'(L) and r_target = l / L^2 - B.

    Args:
        pole (Pole): Verified pole
        source (SourceData): Transformed data at that pole
        L (float): Radius
        a (float): Boundary coefficient

    Returns:
        PoleTarget: l_value and r_target
    """
    omega = pole.omega
    psi_L, dpsi_L = _ivp_rk4(1.0 + omega * omega, source)
    l_value = (1j * L * omega - a) * psi_L + a * L * dpsi_L
    return PoleTarget(pole=pole, l_value=complex(l_value), r_target=complex(l_value / L ** 2 - source.B))


# ============================================================================
# Fourier moments of a trajectory
# ============================================================================

class FourierAccumulator:
    """
    Streaming trapezoid accumulator for F(w_j, r) and B(w_j) over a trajectory.

    Feed states in time order with observe(); the accumulator never stores the
    trajectory. Linear cutoff terms live on (start, start + 1); with
    nonlinear=True the chi * r h term is integrated up to t_stop.

    Args:
        grid (RadialGrid): Spatial grid
        omegas (Sequence[complex]): Frequencies (poles)
        dt (float): Uniform time step of the trajectory
        t_stop (float): End of the integration window
        cutoff (SmoothCutoff): chi
        nonlinear (bool): Include chi * r h with h = (3/2)u^2 + (1/2)u^3

    Example:
        >>> acc = FourierAccumulator(grid, [pole.omega], dt=1e-3, t_stop=2.0)
        >>> for state in states: acc.observe(state)
        >>> sources = acc.sources()
    """

    def __init__(self, grid: RadialGrid, omegas: Sequence[complex], dt: float, t_stop: float = 2.0,
                 cutoff: SmoothCutoff = STANDARD_CUTOFF, nonlinear: bool = False):
        self.grid = grid
        self.omegas = np.asarray(list(omegas), dtype=complex)
        self.dt = float(dt)
        self.t_stop = float(t_stop)
        self.cutoff = cutoff
        self.nonlinear = nonlinear
        self._acc_F = np.zeros((self.omegas.size, grid.n_points), dtype=complex)
        self._acc_B = np.zeros(self.omegas.size, dtype=complex)
        self._last_F: Optional[np.ndarray] = None
        self._last_B: Optional[np.ndarray] = None
        self._first_time: Optional[float] = None
        self._last_time: Optional[float] = None
        self._seen_time: Optional[float] = None

    def _linear_window(self, t: float) -> bool:
        return self.cutoff.start < t < self.cutoff.start + 1.0

    def observe(self, state: RadialState) -> None:
        t = float(state.time)
        if self._seen_time is not None:
            if abs(t - self._seen_time - self.dt) > 1e-9 * max(1.0, abs(t)):
                raise InsufficientHistoryError(
                    f"Non-uniform history: step {t - self._seen_time:.6g} != dt {self.dt:.6g}", time=t)
        else:
            self._first_time = t
        self._seen_time = t
        if t > self.t_stop + 0.5 * self.dt:
            return
        self._last_time = t

        weight = self.dt if t > self._first_time else 0.5 * self.dt
        contribution_F = None
        contribution_B = None
        if self._linear_window(t) or self.nonlinear:
            phase = np.exp(-1j * self.omegas * t)
            chi_t, chi_tt = self.cutoff.d1(t), self.cutoff.d2(t)
            coeff = phase * (2j * self.omegas * chi_t - chi_tt)
            contribution_F = np.outer(coeff, state.psi)
            if self.nonlinear:
                chi = self.cutoff.value(t)
                if chi > 0:
                    contribution_F = contribution_F + np.outer(phase * chi, shifted_nonlinearity(state.psi, self.grid))
            contribution_B = phase * chi_t * state.psi[-1] / self.grid.L
            self._acc_F += weight * contribution_F
            self._acc_B += weight * contribution_B
        self._last_F = contribution_F
        self._last_B = contribution_B

    def sources(self) -> List[SourceData]:
        """
        Finished SourceData per frequency (trapezoid end weight applied).

        Raises:
            InsufficientHistoryError: If the observed times do not cover [0, t_stop]
        """
        if self._first_time is None or self._first_time > 0.5 * self.dt:
            raise InsufficientHistoryError("History must start at t = 0", first=self._first_time)
        if self._last_time is None or self._last_time < self.t_stop - 0.5 * self.dt:
            raise InsufficientHistoryError(
                f"History ends at t = {self._last_time} before t_stop = {self.t_stop}",
                last=self._last_time, t_stop=self.t_stop)
        acc_F, acc_B = self._acc_F.copy(), self._acc_B.copy()
        if self._last_F is not None and self._last_time > self._first_time:
            acc_F -= 0.5 * self.dt * self._last_F
            acc_B -= 0.5 * self.dt * self._last_B
        out = []
        for j in range(self.omegas.size):
            F = -acc_F[j]
            F[0] = 0.0
            out.append(SourceData(self.grid, F, acc_B[j], description=f"trajectory moments at w = {self.omegas[j]:.6g}"))
        return out


def fourier_sources(history: Iterable[RadialState], omegas: Sequence[complex], dt: float,
                    t_stop: float = 2.0, cutoff: SmoothCutoff = STANDARD_CUTOFF,
                    nonlinear: bool = False) -> List[SourceData]:
    """Batch form of FourierAccumulator over a stored history."""
    history = list(history)
    if not history:
        raise InsufficientHistoryError("Empty history")
    accumulator = FourierAccumulator(history[0].grid, omegas, dt, t_stop, cutoff, nonlinear)
    for state in history:
        accumulator.observe(state)
    return accumulator.sources()


def fourier_source(history: Iterable[RadialState], chi: SmoothCutoff, omega: complex,
                   dt: Optional[float] = None, nonlinear: bool = False, t_stop: float = 2.0) -> SourceData:
    """
    H(w, .) and the trace moment of a stored trajectory at one frequency.

    Args:
        history: States at uniform times starting at t = 0
        chi (SmoothCutoff): Cutoff
        omega (complex): Frequency
        dt (Optional[float]): Time step (inferred from the first two states if None)
        nonlinear (bool): Include the chi * r h term
        t_stop (float): End of the window

    Raises:
        InsufficientHistoryError: If the history is too short or non-uniform
    """
    history = list(history)
    if len(history) < 2:
        raise InsufficientHistoryError("Need at least two states")
    if dt is None:
        dt = history[1].time - history[0].time
    return fourier_sources(history, [omega], dt, t_stop, chi, nonlinear)[0]


if __name__ == "__main__":
    grid = RadialGrid(L=1.0, n_points=801)
    r = grid.nodes
    source = SourceData(grid, r * np.exp(-20.0 * (r - 0.5) ** 2), B=0.1)
    omega = 2.0 + 0.3j
    via_kernel = resolve_elliptic(omega, source, 1.0, 0.5)
    via_bvp = solve_direct_bvp(omega, source, 1.0, 0.5)
    print(f"max |Green - BVP| at w={omega}: {np.max(np.abs(via_kernel - via_bvp)):.2e}")
