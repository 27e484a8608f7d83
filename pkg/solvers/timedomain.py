"""
Time-Domain Evolution and Stabilization Runs

Finite-difference evolution of the radial equation in psi = r*u form,

    psi_tt = psi_rr + c psi [+ (3/2) psi^2/r + (1/2) psi^3/r^2] [+ forcing],
    psi(t, 0) = 0,   psi_t + a psi_r - (a/L) psi = L b(t) at r = L,

with an explicit leapfrog scheme and a ghost node for the boundary row, plus
the stabilization drivers built on top of it:

- simulate: run a configuration, recording EnergyReports and optional snapshots
- compute_observer_targets: moment targets from the trajectory on [0, 2]
- open_loop_stabilize: control synthesis (Picard iteration on the control in
  the nonlinear mode)
- closed_loop_run: periodic observer feedback
- measure_decay_rate: least-squares fit of log h1 over a window

Architecture:
- A single run is strictly sequential; runs share no state
- Observers (e.g. greens.FourierAccumulator) are fed every time level, so
  trajectories are never stored in full
"""
import enum
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from solvers.greens import FourierAccumulator, PoleTarget, pole_compatibility
from solvers.moments import ControlSignal, MomentSystem, synthesize_from_targets
from solvers.radial_core import (
    EnergyReport, RadialGrid, RadialState, dissipation_rate, energy_e0, h1_norm, shifted_nonlinearity,
)
from solvers.spectral import Pole, asymptotic_line, default_margin, find_imaginary_poles, find_poles_in_strip
from utils.errors import BlowupError, NonPositiveNormError, PicardDivergedError, PoleOnLineError
from utils.logging_config import get_logger, metrics_tracker

logger = get_logger("timedomain")

CFL_MAX = 0.9
OBSERVATION_END = 2.0
CONTROL_SUPPORT_END = 4.0

ControlFn = Callable[[float], float]
ForcingFn = Callable[[float, np.ndarray], np.ndarray]


class EvolutionMode(enum.Enum):
    LINEARIZED = "linearized"
    NONLINEAR_SHIFTED = "nonlinear_shifted"


@dataclass(frozen=True)
class EvolutionConfig:
    """
    Discretization and model parameters of a run.

    Attributes:
        grid (RadialGrid): Spatial grid
        dt (float): Time step, dt <= 0.9 dr
        a (float): Boundary coefficient in (0, 1)
        mode (EvolutionMode): Linearized or shifted nonlinear equation
        potential_coeff (float): c in psi_tt = psi_rr + c psi (0 gives the free wave)
        T_end (float): Final time
        record_every (int): Energy report cadence in steps
        snapshot_interval (float): Time between stored snapshots (when requested)
        blowup_threshold (float): max |psi| that counts as escape
    """

    grid: RadialGrid
    dt: float
    a: float
    mode: EvolutionMode = EvolutionMode.LINEARIZED
    potential_coeff: float = 1.0
    T_end: float = 30.0
    record_every: int = 10
    snapshot_interval: float = 0.1
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise ValueError(f"a must lie in (0, 1), got {self.a}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.dt / self.grid.dr > CFL_MAX * (1.0 + 1e-12):
            raise ValueError(f"CFL violated: dt/dr = {self.dt / self.grid.dr:.4f} > {CFL_MAX}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.T_end <= 0:
            raise ValueError(f"T_end must be positive, got {self.T_end}")

    @classmethod
    def with_cfl(cls, grid: RadialGrid, a: float, cfl: float = CFL_MAX, **kwargs) -> "EvolutionConfig":
        """Config with dt = cfl * dr."""
        return cls(grid=grid, dt=cfl * grid.dr, a=a, **kwargs)

    @property
    def nonlinear(self) -> bool:
        return self.mode is EvolutionMode.NONLINEAR_SHIFTED

    def steps_for(self, duration: float) -> int:
        return int(round(duration / self.dt))


@dataclass(frozen=True)
class DecayFit:
    """
    Exponential fit of h1 over a window.

    Attributes:
        rate (float): Negated slope of log h1 (positive means decay); inf when trivial
        r_squared (float): Coefficient of determination
        window (Tuple[float, float]): Fit window
        trivial (bool): Signal was numerically zero and the fit was skipped
    """

    rate: float
    r_squared: float
    window: Tuple[float, float]
    trivial: bool = False


@dataclass
class SimulationHistory:
    """
    Recorded diagnostics of a run.

    Attributes:
        reports (List[EnergyReport]): Energy reports at the recorded levels
        controls (List[float]): b(t) at the recorded levels
        snapshots (List[Tuple[float, np.ndarray, np.ndarray]]): (t, psi, psi_t) when kept
        final_state (Optional[RadialState]): Last state reached
        dissipated (float): Boundary dissipation accumulated over the run
    """

    reports: List[EnergyReport] = field(default_factory=list)
    controls: List[float] = field(default_factory=list)
    snapshots: List[Tuple[float, np.ndarray, np.ndarray]] = field(default_factory=list)
    final_state: Optional[RadialState] = None
    dissipated: float = 0.0
    periods: List[int] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.reports])

    @property
    def h1_norms(self) -> np.ndarray:
        return np.array([r.h1 for r in self.reports])

    def extend(self, other: "SimulationHistory", time_offset: float = 0.0, period: Optional[int] = None,
               skip_first: bool = False) -> None:
        """Append another history with shifted times (closed-loop stitching)."""
        start = 1 if skip_first else 0
        for report, b_value in zip(other.reports[start:], other.controls[start:]):
            self.reports.append(replace(report, time=report.time + time_offset))
            self.controls.append(b_value)
            if period is not None:
                self.periods.append(period)
        self.final_state = other.final_state
        self.dissipated += other.dissipated

    def to_frame(self) -> pd.DataFrame:
        """History table with columns t, h1_norm, e0, trace_u, b (and period for closed loop)."""
        frame = pd.DataFrame({
            "t": self.times,
            "h1_norm": self.h1_norms,
            "e0": [r.e0 for r in self.reports],
            "trace_u": [r.trace_u for r in self.reports],
            "b": np.asarray(self.controls, dtype=float),
        })
        if self.periods and len(self.periods) == len(self.reports):
            frame["period"] = self.periods
        return frame


# ============================================================================
# Leapfrog stepper
# ============================================================================

def _source(psi: np.ndarray, t: float, config: EvolutionConfig, forcing: Optional[ForcingFn]) -> np.ndarray:
    src = config.potential_coeff * psi
    if config.nonlinear:
        src = src + shifted_nonlinearity(psi, config.grid)
    if forcing is not None:
        src = src + np.asarray(forcing(t, config.grid.nodes), dtype=float)
    return src


def _taylor_previous(state: RadialState, config: EvolutionConfig, b_value: float,
                     forcing: Optional[ForcingFn]) -> np.ndarray:
    # psi at t - dt from psi, psi_t and psi_tt; the boundary ghost uses the Robin row with psi_t
    grid, dt, a = config.grid, config.dt, config.a
    dr, L = grid.dr, grid.L
    psi, psi_t = state.psi, state.psi_t
    src = _source(psi, state.time, config, forcing)
    acc = np.zeros_like(psi)
    acc[1:-1] = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / dr ** 2 + src[1:-1]
    ghost = psi[-2] + (2.0 * dr / a) * (L * b_value + (a / L) * psi[-1] - psi_t[-1])
    acc[-1] = (ghost - 2.0 * psi[-1] + psi[-2]) / dr ** 2 + src[-1]
    prev = psi - dt * psi_t + 0.5 * dt * dt * acc
    prev[0] = 0.0
    return prev


def _advance(psi: np.ndarray, psi_prev: np.ndarray, t: float, b_value: float, config: EvolutionConfig,
             forcing: Optional[ForcingFn]) -> np.ndarray:
    grid, dt, a = config.grid, config.dt, config.a
    dr, L = grid.dr, grid.L
    lam = dt / dr
    lam2 = lam * lam
    mu = lam / a
    src = _source(psi, t, config, forcing)

    nxt = np.empty_like(psi)
    nxt[0] = 0.0
    nxt[1:-1] = (2.0 * psi[1:-1] - psi_prev[1:-1]
                 + lam2 * (psi[2:] - 2.0 * psi[1:-1] + psi[:-2])
                 + dt * dt * src[1:-1])
    P, Y, Q = psi[-1], psi_prev[-1], psi[-2]
    nxt[-1] = (2.0 * P - (1.0 - mu) * Y + 2.0 * lam2 * (Q - P)
               + (2.0 * lam2 * dr / a) * (L * b_value + (a / L) * P)
               + dt * dt * src[-1]) / (1.0 + mu)
    return nxt


def step(state: RadialState, config: EvolutionConfig, b_value: float,
         forcing: Optional[ForcingFn] = None) -> RadialState:
    """
    Advance one leapfrog step.

    The boundary row uses a centered time difference and a ghost node, which
    makes it implicit only in the boundary value itself. A state without a
    stored previous level is started with a second-order Taylor step.

    Args:
        state (RadialState): Current level (time t)
        config (EvolutionConfig): Run configuration
        b_value (float): Boundary control b(t) at the current level
        forcing (Optional[ForcingFn]): Extra source f(t, r) in psi variables

    Returns:
        RadialState: Level t + dt, with psi_t from the BDF2 difference

    Raises:
        BlowupError: If max |psi| exceeds the configured threshold
    """
    psi_prev = state.psi_prev
    if psi_prev is None:
        psi_prev = _taylor_previous(state, config, b_value, forcing)
    nxt = _advance(state.psi, psi_prev, state.time, b_value, config, forcing)
    peak = float(np.max(np.abs(nxt)))
    if not math.isfinite(peak) or peak > config.blowup_threshold:
        raise BlowupError(f"max |psi| = {peak:.3e} at t = {state.time + config.dt:.4f}",
                          time=state.time + config.dt)
    psi_t = (3.0 * nxt - 4.0 * state.psi + psi_prev) / (2.0 * config.dt)
    psi_t[0] = 0.0
    return RadialState(grid=config.grid, psi=nxt, psi_t=psi_t,
                       time=state.time + config.dt, psi_prev=state.psi)


# ============================================================================
# Simulation driver
# ============================================================================

def _evaluate_control(control: Optional[ControlFn], t: float) -> float:
    return 0.0 if control is None else float(control(t))


def simulate(
    initial: RadialState,
    config: EvolutionConfig,
    control: Optional[ControlFn] = None,
    forcing: Optional[ForcingFn] = None,
    observers: Sequence = (),
    t_end: Optional[float] = None,
    keep_snapshots: bool = False,
) -> SimulationHistory:
    """
    Run from `initial` to `t_end` (default config.T_end), recording diagnostics.

    Args:
        initial (RadialState): Starting state (its time is the start time)
        config (EvolutionConfig): Run configuration
        control (Optional[ControlFn]): b(t); zero if None
        forcing (Optional[ForcingFn]): Extra source f(t, r)
        observers: Objects with observe(state), fed every time level including the first
        t_end (Optional[float]): Final time
        keep_snapshots (bool): Store (t, psi, psi_t) every snapshot_interval

    Returns:
        SimulationHistory: Reports, control samples, snapshots and final state

    Raises:
        BlowupError: With the partial history attached
    """
    t_end = config.T_end if t_end is None else t_end
    n_steps = config.steps_for(t_end - initial.time)
    snapshot_every = max(1, int(round(config.snapshot_interval / config.dt)))
    history = SimulationHistory()
    potential = config.potential_coeff
    dissipated = 0.0

    state = initial
    b_value = _evaluate_control(control, state.time)
    rate_prev = dissipation_rate(state, config.a, b_value)
    for observer in observers:
        observer.observe(state)
    history.reports.append(energy_e0(state, potential, dissipated))
    history.controls.append(b_value)
    if keep_snapshots:
        history.snapshots.append((state.time, state.psi.copy(), state.psi_t.copy()))

    start_time = initial.time
    for k in range(1, n_steps + 1):
        try:
            state = step(state, config, b_value, forcing)
        except BlowupError as exc:
            history.final_state = state
            history.dissipated = dissipated
            exc.history = history
            raise
        # pin times to the uniform lattice
        state = replace(state, time=start_time + k * config.dt)
        b_value = _evaluate_control(control, state.time)
        rate_now = dissipation_rate(state, config.a, b_value)
        dissipated += 0.5 * config.dt * (rate_prev + rate_now)
        rate_prev = rate_now
        for observer in observers:
            observer.observe(state)
        if k % config.record_every == 0 or k == n_steps:
            history.reports.append(energy_e0(state, potential, dissipated))
            history.controls.append(b_value)
        if keep_snapshots and k % snapshot_every == 0:
            history.snapshots.append((state.time, state.psi.copy(), state.psi_t.copy()))

    history.final_state = state
    history.dissipated = dissipated
    return history


def energy_identity_residual(history: SimulationHistory) -> float:
    """
    max_t |E~(t) - E~(0)|, where E~ = E0 + accumulated boundary dissipation.

    Vanishes in the continuum for the free wave (potential 0) with b = 0.
    """
    if not history.reports:
        return 0.0
    base = history.reports[0].e_tilde
    return float(max(abs(r.e_tilde - base) for r in history.reports))


# ============================================================================
# Decay measurement
# ============================================================================

def fit_decay(times: np.ndarray, norms: np.ndarray, window: Tuple[float, float]) -> DecayFit:
    """
    Least-squares fit of log(norm) = c - rate * t over the window.

    Raises:
        NonPositiveNormError: If a norm in the window is not positive
        ValueError: If fewer than two samples fall in the window
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    mask = (times >= window[0]) & (times <= window[1])
    t_win, n_win = times[mask], norms[mask]
    if t_win.size < 2:
        raise ValueError(f"Fewer than two samples in window {window}")
    if np.any(~(n_win > 1e-300)):
        raise NonPositiveNormError(f"Norm reached numerical zero inside window {window}")
    log_n = np.log(n_win)
    slope, intercept = np.polyfit(t_win, log_n, 1)
    residual = log_n - (slope * t_win + intercept)
    total = log_n - log_n.mean()
    ss_tot = float(np.dot(total, total))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(np.dot(residual, residual)) / ss_tot
    return DecayFit(rate=float(-slope), r_squared=r_squared, window=(float(window[0]), float(window[1])))


def measure_decay_rate(history: SimulationHistory, window: Optional[Tuple[float, float]] = None) -> DecayFit:
    """
    Decay rate of h1 over a window (default [5, last recorded time]).

    Raises:
        NonPositiveNormError: If the signal hits numerical zero in the window
    """
    times = history.times
    if window is None:
        window = (5.0, float(times[-1]))
    return fit_decay(times, history.h1_norms, window)


def _fit_or_flag(history: SimulationHistory, window: Tuple[float, float]) -> DecayFit:
    try:
        return measure_decay_rate(history, window)
    except NonPositiveNormError:
        logger.info("Norm reached numerical zero; decay fit skipped")
        return DecayFit(rate=math.inf, r_squared=math.nan, window=window, trivial=True)


# ============================================================================
# Observer targets
# ============================================================================

@dataclass
class ObserverPass:
    """Targets from one observation pass plus the history it produced."""
    targets: List[PoleTarget]
    history: SimulationHistory


def _observe(initial: RadialState, config: EvolutionConfig, poles: Sequence[Pole],
             control: Optional[ControlFn] = None, horizon: Optional[float] = None,
             keep_snapshots: bool = False) -> ObserverPass:
    # linear: the trajectory on [0, 2] does not see b; nonlinear: chi * h over [0, horizon]
    start = initial.shifted_time(0.0)
    t_stop = OBSERVATION_END if not config.nonlinear else (horizon or config.T_end)
    accumulator = FourierAccumulator(config.grid, [p.omega for p in poles], config.dt,
                                     t_stop=t_stop, nonlinear=config.nonlinear)
    run_until = t_stop if horizon is None else max(t_stop, horizon)
    history = simulate(start, config, control=control, observers=[accumulator],
                       t_end=run_until, keep_snapshots=keep_snapshots)
    L, a = config.grid.L, config.a
    targets = [pole_compatibility(pole, source, L, a) for pole, source in zip(poles, accumulator.sources())]
    return ObserverPass(targets=targets, history=history)


def compute_observer_targets(initial: RadialState, config: EvolutionConfig, poles: Sequence[Pole],
                             control: Optional[ControlFn] = None,
                             horizon: Optional[float] = None) -> List[PoleTarget]:
    """
    Moment targets for every pole from the trajectory started at `initial`.

    In the linearized mode the trajectory on [0, 2] is simulated without
    control and only the cutoff terms enter. In the nonlinear mode the
    trajectory driven by `control` (the current iterate) is simulated up to
    `horizon` and the chi * h term is integrated along it.

    Returns:
        List[PoleTarget]: One target per pole (conjugate-symmetric for real data)

    Raises:
        InsufficientHistoryError: If the observation window is not covered
    """
    return _observe(initial, config, poles, control=control, horizon=horizon).targets


# ============================================================================
# Open loop
# ============================================================================

@dataclass
class StabilizationRun:
    """
    Result of an open-loop stabilization.

    Attributes:
        beta_target (float): Decay rate aimed for
        poles_cancelled (List[Pole]): Poles whose moments the control matches
        control (ControlSignal): Synthesized control
        picard_iters (int): Fixed-point iterations (0 in linearized mode)
        decay_fit (DecayFit): Fitted decay of h1
        history (SimulationHistory): Controlled trajectory
        c_beta (float): Measured sum|l_k| / ||initial|| of the linearized control
        coefficient_gain (float): Induced 1-norm of the moment pseudo-inverse
        converged (bool): Picard tolerance reached (always True in linearized mode)
        picard_distances (List[float]): Successive trajectory distances
        smallness_ok (bool): (12 C^2 eps + 8 C^3 eps^2)/beta <= 1/2 with the measured C
    """

    beta_target: float
    poles_cancelled: List[Pole]
    control: ControlSignal
    picard_iters: int
    decay_fit: DecayFit
    history: SimulationHistory
    c_beta: float = 0.0
    coefficient_gain: float = 0.0
    converged: bool = True
    picard_distances: List[float] = field(default_factory=list)
    smallness_ok: bool = True
    initial_norm: float = 0.0
    system: Optional[MomentSystem] = None

    @property
    def coefficient_bound_ok(self) -> bool:
        """sum |l_k| <= 2 C_beta ||initial||."""
        return self.control.coefficient_l1 <= 2.0 * self.c_beta * self.initial_norm * (1.0 + 1e-9) + 1e-300


def _check_beta(L: float, a: float, beta_target: float) -> None:
    beta_inf = asymptotic_line(L, a)
    if not (0.0 < beta_target < beta_inf):
        raise ValueError(f"beta_target must lie in (0, {beta_inf:.6g}), got {beta_target}")


def _trajectory_distance(first: SimulationHistory, second: SimulationHistory, beta: float,
                         grid: RadialGrid) -> float:
    # sup_t e^{beta t} ||v1(t) - v2(t)||_H1 over shared snapshots
    worst = 0.0
    for (t1, psi1, pt1), (_, psi2, pt2) in zip(first.snapshots, second.snapshots):
        diff = RadialState(grid=grid, psi=psi1 - psi2, psi_t=pt1 - pt2, time=t1)
        worst = max(worst, math.exp(beta * t1) * h1_norm(diff))
    return worst


def smallness_condition(c_beta: float, epsilon: float, beta: float) -> float:
    """(12 C^2 eps + 8 C^3 eps^2) / beta; the contraction argument needs <= 1/2."""
    return (12.0 * c_beta ** 2 * epsilon + 8.0 * c_beta ** 3 * epsilon ** 2) / beta


def open_loop_stabilize(
    initial: RadialState,
    config: EvolutionConfig,
    beta_target: float,
    poles: Optional[Sequence[Pole]] = None,
    alpha_max: Optional[float] = None,
    picard_tol: float = 1e-8,
    max_picard: int = 50,
    window: Optional[Tuple[float, float]] = None,
) -> StabilizationRun:
    """
    Open-loop control that cancels every pole below beta_target.

    Linearized mode: one observation on [0, 2], one synthesis, one run.
    Nonlinear mode: Picard iteration on the control. Iterate n simulates the
    nonlinear equation driven by b^n, integrates chi * h along that trajectory
    into the targets and synthesizes b^{n+1}; it stops once
    sup_t e^{beta t} ||v^{n+1} - v^n|| < picard_tol or after max_picard iterations.

    Args:
        initial (RadialState): Deviation from equilibrium at t = 0
        config (EvolutionConfig): Run configuration (T_end >= 4)
        beta_target (float): Target decay rate below the asymptotic line
        poles (Optional[Sequence[Pole]]): Precomputed poles (searched if None)
        alpha_max (Optional[float]): Frequency cutoff for the search (default 20 pi/L)
        picard_tol (float): Fixed-point tolerance
        max_picard (int): Iteration cap
        window (Optional[Tuple[float, float]]): Decay-fit window (default [5, T_end])

    Returns:
        StabilizationRun: Control, trajectory and decay fit

    Raises:
        PicardDivergedError: If the iteration stops contracting
        BlowupError: If a trajectory escapes
    """
    grid, a = config.grid, config.a
    L = grid.L
    _check_beta(L, a, beta_target)
    if config.T_end < CONTROL_SUPPORT_END:
        raise ValueError(f"T_end must be >= {CONTROL_SUPPORT_END} for controlled runs")
    window = (5.0, config.T_end) if window is None else window
    started = time.time()

    if poles is None:
        poles = find_poles_in_strip(L, a, beta_target, alpha_max or 20.0 * math.pi / L)
    poles = list(poles)

    initial = initial.shifted_time(0.0)
    initial_norm = h1_norm(initial)
    if initial_norm == 0.0:
        logger.info("Initial data is the equilibrium; control is identically zero")
        control = ControlSignal.zero()
        history = simulate(initial, config, control=None)
        return StabilizationRun(beta_target, poles, control, 0,
                                DecayFit(math.inf, math.nan, window, trivial=True), history,
                                initial_norm=0.0)

    # Linearized observation and synthesis
    linear_config = replace(config, mode=EvolutionMode.LINEARIZED)
    targets = _observe(initial, linear_config, poles).targets
    control, system = synthesize_from_targets(targets)
    c_beta = control.coefficient_l1 / initial_norm
    small = smallness_condition(c_beta, initial_norm, beta_target)
    smallness_ok = small <= 0.5
    if config.nonlinear and not smallness_ok:
        logger.warning(f"Smallness condition violated: (12C^2 eps + 8C^3 eps^2)/beta = {small:.3g} > 1/2 "
                       f"(C={c_beta:.3g}, eps={initial_norm:.3g})")

    picard_iters = 0
    distances: List[float] = []
    converged = True
    if not config.nonlinear:
        history = simulate(initial, config, control=control)
    else:
        converged = False
        previous: Optional[SimulationHistory] = None
        history = None
        for iteration in range(1, max_picard + 1):
            observed = _observe(initial, config, poles, control=control, horizon=config.T_end,
                                keep_snapshots=True)
            history = observed.history
            picard_iters = iteration
            if previous is not None:
                distance = _trajectory_distance(history, previous, beta_target, grid)
                distances.append(distance)
                logger.debug(f"Picard iteration {iteration}: distance {distance:.3e}")
                if not math.isfinite(distance):
                    raise PicardDivergedError("Picard distance is not finite", iteration=iteration)
                if distance < picard_tol:
                    converged = True
                    break
                if len(distances) >= 4 and distances[-1] > distances[-2] > distances[-3] > distances[-4]:
                    raise PicardDivergedError(
                        f"Picard distances grew three times in a row (last {distance:.3e})",
                        iteration=iteration)
            previous = history
            control, system = synthesize_from_targets(observed.targets)
        if not converged:
            logger.warning(f"Picard iteration stopped after {max_picard} iterations without reaching {picard_tol:g}")
        history.snapshots = []

    fit = _fit_or_flag(history, window)
    elapsed = time.time() - started
    metrics_tracker.record("open_loop_time", elapsed, {"mode": config.mode.value})
    metrics_tracker.record("picard_iterations", picard_iters, {"mode": config.mode.value})
    logger.info(f"Open loop ({config.mode.value}): rate {fit.rate:.4f} (target {beta_target:.4f}), "
                f"r^2 {fit.r_squared:.4f}, Picard {picard_iters}, {elapsed:.1f}s")
    return StabilizationRun(
        beta_target=beta_target, poles_cancelled=poles, control=control, picard_iters=picard_iters,
        decay_fit=fit, history=history, c_beta=c_beta, coefficient_gain=system.coefficient_gain,
        converged=converged, picard_distances=distances, smallness_ok=smallness_ok,
        initial_norm=initial_norm, system=system,
    )


def uncontrolled_run(initial: RadialState, config: EvolutionConfig,
                     window: Optional[Tuple[float, float]] = None) -> Tuple[SimulationHistory, DecayFit, bool]:
    """
    Free run with b = 0 (the twin of a controlled run).

    Returns:
        (history, fit, diverged): a blowup ends the run early and is reported, not raised
    """
    diverged = False
    try:
        history = simulate(initial.shifted_time(0.0), config, control=None)
    except BlowupError as exc:
        history = exc.history
        diverged = True
        logger.info(f"Uncontrolled run diverged: {exc}")
    last = float(history.times[-1])
    window = window or (min(5.0, 0.5 * last), last)
    return history, _fit_or_flag(history, window), diverged


# ============================================================================
# Instability demonstration
# ============================================================================

@dataclass
class GrowthReport:
    """Growth of the linearized free run started on the most unstable mode."""
    s_expected: float
    rate_measured: float
    r_squared: float
    relative_error: float
    imaginary_poles: List[float]
    history: SimulationHistory
    diverged: bool = False


def unstable_mode_state(grid: RadialGrid, s: float, amplitude: float = 1e-3) -> RadialState:
    """psi = A sin(q r), psi_t = s psi with q = sqrt(1 - s^2): the growing eigenmode e^{st}."""
    q = math.sqrt(max(1.0 - s * s, 0.0))
    r = grid.nodes
    psi = amplitude * (np.sin(q * r) if q > 0 else r)
    psi[0] = 0.0
    return RadialState(grid=grid, psi=psi, psi_t=s * psi, time=0.0)


def linear_growth_run(config: EvolutionConfig, amplitude: float = 1e-3,
                      window: Optional[Tuple[float, float]] = None) -> GrowthReport:
    """
    Simulate the linearized free run from the most unstable eigenmode and fit its growth.

    Raises:
        ValueError: If (L, a) has no unstable imaginary pole
    """
    grid = config.grid
    roots = find_imaginary_poles(grid.L, config.a)
    unstable = [s for s in roots if 0.0 < s < 1.0]
    if not unstable:
        raise ValueError(f"No unstable imaginary pole for L={grid.L}, a={config.a}")
    s = max(unstable)
    linear_config = replace(config, mode=EvolutionMode.LINEARIZED)
    history, fit, diverged = uncontrolled_run(unstable_mode_state(grid, s, amplitude), linear_config,
                                              window=window or (1.0, config.T_end))
    measured = -fit.rate
    return GrowthReport(s_expected=s, rate_measured=measured, r_squared=fit.r_squared,
                        relative_error=abs(measured - s) / s, imaginary_poles=roots,
                        history=history, diverged=diverged)


# ============================================================================
# Closed loop
# ============================================================================

@dataclass(frozen=True)
class ClosedLoopConfig:
    """
    Periodic observer feedback settings.

    Attributes:
        T_beta (float): Period (>= 4)
        epsilon0 (Optional[float]): Rate giveback (default beta/4)
        observer (bool): Recompute targets at each period boundary
        n_periods (int): Number of periods
        kick_period (Optional[int]): Period at whose start the state is kicked
        kick_factor (float): Kick size relative to the initial profile
        max_growth (int): How many times T_beta may grow by 1.5x
        picard_per_period (int): Observer Picard iterations in nonlinear mode
    """

    T_beta: float = 6.0
    epsilon0: Optional[float] = None
    observer: bool = True
    n_periods: int = 6
    kick_period: Optional[int] = None
    kick_factor: float = 0.1
    max_growth: int = 4
    picard_per_period: int = 3

    def __post_init__(self):
        if self.T_beta < CONTROL_SUPPORT_END:
            raise ValueError(f"T_beta must be >= {CONTROL_SUPPORT_END}, got {self.T_beta}")
        if self.n_periods < 1:
            raise ValueError("n_periods must be >= 1")


@dataclass(frozen=True)
class PeriodRecord:
    """Per-period observer output."""
    index: int
    start_time: float
    coefficients: np.ndarray
    h1_start: float
    h1_end: float

    @property
    def contraction(self) -> float:
        return self.h1_end / self.h1_start if self.h1_start > 0 else 0.0


class PeriodicControl:
    """
    Closed-loop law b(t) = sum_k l_k(N) b_k(t - N T_beta) with N = floor(t / T_beta).
    """

    def __init__(self, T_beta: float):
        self.T_beta = T_beta
        self._controls: List[ControlSignal] = []

    def __len__(self) -> int:
        return len(self._controls)

    def append(self, control: ControlSignal) -> None:
        self._controls.append(control)

    def __call__(self, t: float) -> float:
        period = int(math.floor(t / self.T_beta))
        if period < 0 or period >= len(self._controls):
            return 0.0
        return self._controls[period].evaluate(t - period * self.T_beta)


@dataclass
class ClosedLoopResult:
    """
    Stitched closed-loop run.

    Attributes:
        history (SimulationHistory): Global-time history with period indices
        periods (List[PeriodRecord]): Per-period records
        T_beta (float): Period actually used (after any growth)
        epsilon0 (float): Rate giveback
        beta_target (float): Target decay rate
        poles (List[Pole]): Poles cancelled in every period
        law (PeriodicControl): The global control b(t)
        period_fit_slope (float): Slope of log h1 at period starts (nan with < 3 periods)
    """

    history: SimulationHistory
    periods: List[PeriodRecord]
    T_beta: float
    epsilon0: float
    beta_target: float
    poles: List[Pole]
    law: PeriodicControl
    period_fit_slope: float = math.nan

    @property
    def contraction_bound(self) -> float:
        """exp(-(beta - epsilon0) T_beta), the per-period contraction aimed for."""
        return math.exp(-(self.beta_target - self.epsilon0) * self.T_beta)


def _period_control(state: RadialState, config: EvolutionConfig, poles: Sequence[Pole],
                    horizon: float, picard_iters: int) -> ControlSignal:
    linear_config = replace(config, mode=EvolutionMode.LINEARIZED)
    control, _ = synthesize_from_targets(_observe(state, linear_config, poles).targets)
    if config.nonlinear:
        for _ in range(picard_iters):
            observed = _observe(state, config, poles, control=control, horizon=horizon)
            control, _ = synthesize_from_targets(observed.targets)
    return control


def _run_period(state: RadialState, config: EvolutionConfig, poles: Sequence[Pole], T: float,
                picard_iters: int, use_observer: bool, fallback: Optional[ControlSignal]):
    if use_observer or fallback is None:
        control = _period_control(state, config, poles, T, picard_iters)
    else:
        control = fallback
    history = simulate(state.shifted_time(0.0), config, control=control, t_end=T)
    return control, history


def closed_loop_run(
    initial: RadialState,
    config: EvolutionConfig,
    clconfig: ClosedLoopConfig,
    beta_target: float,
    poles: Optional[Sequence[Pole]] = None,
    alpha_max: Optional[float] = None,
) -> ClosedLoopResult:
    """
    Periodic feedback: at every period boundary the current state is treated
    as fresh initial data, targets are recomputed and one period is run.

    The first period is re-run with T_beta grown by 1.5x while its h1
    contraction misses exp(-(beta - epsilon0) T_beta), at most max_growth times.

    Returns:
        ClosedLoopResult: Stitched history (global time) and per-period records

    Raises:
        BlowupError: With the failing period index
    """
    grid, a = config.grid, config.a
    L = grid.L
    _check_beta(L, a, beta_target)
    eps0 = clconfig.epsilon0 if clconfig.epsilon0 is not None else 0.25 * beta_target
    if not (0.0 < eps0 < beta_target):
        raise ValueError(f"epsilon0 must lie in (0, beta_target), got {eps0}")
    if poles is None:
        poles = find_poles_in_strip(L, a, beta_target, alpha_max or 20.0 * math.pi / L)
    poles = list(poles)

    T = clconfig.T_beta
    state = initial.shifted_time(0.0)
    history = SimulationHistory()
    records: List[PeriodRecord] = []
    last_control: Optional[ControlSignal] = None

    for index in range(clconfig.n_periods):
        if clconfig.kick_period is not None and index == clconfig.kick_period:
            kicked = state.psi + clconfig.kick_factor * initial.psi
            kicked_t = state.psi_t + clconfig.kick_factor * initial.psi_t
            state = RadialState(grid=grid, psi=kicked, psi_t=kicked_t, time=0.0)
            logger.info(f"Period {index}: state kicked by {clconfig.kick_factor:g} x initial profile")

        h1_start = h1_norm(state)
        growth = 0
        while True:
            try:
                control, period_history = _run_period(state, config, poles, T, clconfig.picard_per_period,
                                                      clconfig.observer, last_control)
            except BlowupError as exc:
                exc.period = index
                exc.details["period"] = index
                raise
            h1_end = period_history.reports[-1].h1
            bound = math.exp(-(beta_target - eps0) * T)
            ratio = h1_end / h1_start if h1_start > 0 else 0.0
            if index > 0 or ratio <= bound or growth >= clconfig.max_growth:
                if index == 0 and ratio > bound:
                    logger.warning(f"First-period contraction {ratio:.3g} misses bound {bound:.3g} "
                                   f"at T_beta = {T:.3g}")
                break
            growth += 1
            T *= 1.5
            logger.info(f"First-period contraction {ratio:.3g} > {bound:.3g}; growing T_beta to {T:.3g}")

        if index == 0:
            law = PeriodicControl(T)
        history.extend(period_history, time_offset=index * T, period=index, skip_first=index > 0)
        records.append(PeriodRecord(index=index, start_time=index * T,
                                    coefficients=control.coefficients.copy(),
                                    h1_start=h1_start, h1_end=h1_end))
        law.append(control)
        last_control = control
        state = period_history.final_state
        logger.info(f"Period {index}: contraction {h1_end / h1_start if h1_start else 0.0:.4g}, "
                    f"sum|l| = {control.coefficient_l1:.3e}")

    result = ClosedLoopResult(history=history, periods=records, T_beta=T, epsilon0=eps0,
                              beta_target=beta_target, poles=poles, law=law)
    starts = np.array([r.h1_start for r in records] + [records[-1].h1_end])
    if np.all(starts > 0) and len(starts) >= 3:
        result.period_fit_slope = float(np.polyfit(np.arange(1, len(starts)), np.log(starts[1:]), 1)[0])
    return result


def default_beta_target(L: float, a: float, fraction: float = 0.4) -> float:
    """fraction * beta_inf, nudged off any pole line by the default margin."""
    beta = fraction * asymptotic_line(L, a)
    margin = default_margin(L)
    for _ in range(20):
        try:
            find_poles_in_strip(L, a, beta, 20.0 * math.pi / L, delta=margin)
            return beta
        except PoleOnLineError:
            beta -= 4.0 * margin
    return beta


if __name__ == "__main__":
    from utils.logging_config import setup_logging

    setup_logging("INFO")
    demo = EvolutionConfig.with_cfl(RadialGrid(L=1.0, n_points=401), a=0.5, T_end=6.0)
    report = linear_growth_run(demo)
    print(f"s = {report.s_expected:.6f}, measured growth = {report.rate_measured:.6f} "
          f"(rel. error {report.relative_error:.2e})")
