"""
Moment Problem and Real Control Synthesis

Given the poles below the decay line and the complex moment targets r_j, find a
real control b(t) supported in (2, 4) with

    int e^{-i w_j t} b(t) dt = r_j     for every pole w_j.

Writing w_j = alpha_j + i beta_j, the moment equals C_j - i S_j with
C_j = int e^{beta_j t} cos(alpha_j t) b and S_j = int e^{beta_j t} sin(alpha_j t) b,
so each complex pair contributes two real rows and each imaginary pole one.
b is expanded in a fixed smooth basis (a bump times Legendre modulations) and
the real system is solved in the least-norm sense.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import legendre
from scipy import linalg
from scipy.integrate import quad

from solvers.greens import PoleTarget
from solvers.spectral import Pole
from utils.errors import RankDeficientError, TargetMismatchError
from utils.logging_config import get_logger

logger = get_logger("moments")

SUPPORT = (2.0, 4.0)
SPARE_COLUMNS = 4
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12
MOMENT_TOL = 1e-8
PAIRING_TOL = 1e-8


def _bump(tau: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # rho = exp(-1/(1 - tau^2)) and its derivative; exactly 0 where rho underflows
    tau = np.asarray(tau, dtype=float)
    rho = np.zeros_like(tau)
    drho = np.zeros_like(tau)
    gap = 1.0 - tau * tau
    live = gap > 1e-3
    rho[live] = np.exp(-1.0 / gap[live])
    drho[live] = rho[live] * (-2.0 * tau[live] / gap[live] ** 2)
    return rho, drho


@dataclass(frozen=True)
class ControlBasis:
    """
    N smooth real functions supported in (2, 4).

    b_k(t) = rho(t - 3) * P_{k-1}(t - 3), rho(x) = exp(-1/(1 - x^2)), P Legendre.

    Attributes:
        size (int): N
    """

    size: int
    support: Tuple[float, float] = SUPPORT

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValueError(f"Basis size must be an integer >= 1, got {self.size}")

    @property
    def center(self) -> float:
        return 0.5 * (self.support[0] + self.support[1])

    def evaluate(self, t) -> np.ndarray:
        """Basis values, shape (len(t), N) (or (N,) for scalar t)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        tau = t_arr - self.center
        rho, _ = _bump(tau)
        values = rho[:, None] * legendre.legvander(tau, self.size - 1)
        return values[0] if np.ndim(t) == 0 else values

    def evaluate_derivative(self, t) -> np.ndarray:
        """Exact derivatives b_k'(t), same shape as evaluate."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        tau = t_arr - self.center
        rho, drho = _bump(tau)
        vander = legendre.legvander(tau, self.size - 1)
        dvander = np.empty_like(vander)
        for k in range(self.size):
            coeffs = np.zeros(self.size)
            coeffs[k] = 1.0
            dvander[:, k] = legendre.legval(tau, legendre.legder(coeffs))
        values = drho[:, None] * vander + rho[:, None] * dvander
        return values[0] if np.ndim(t) == 0 else values

    def function(self, k: int):
        """Scalar callable for the k-th basis function (0-based)."""
        return lambda t: float(self.evaluate(t)[k])

    def gram_matrix(self) -> np.ndarray:
        """L2 inner products on the support."""
        lo, hi = self.support
        gram = np.empty((self.size, self.size))
        for i in range(self.size):
            for j in range(i, self.size):
                value, _ = quad(lambda t: float(np.prod(self.evaluate(t)[[i, j]])), lo, hi,
                                epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
                gram[i, j] = gram[j, i] = value
        return gram

    def gram_condition(self) -> float:
        return float(np.linalg.cond(self.gram_matrix()))


def build_basis(N: int) -> ControlBasis:
    """
    Basis of N bump-times-Legendre functions on (2, 4).

    Example:
        >>> round(float(build_basis(1).evaluate(3.0)[0]), 4)
        0.3679
    """
    return ControlBasis(size=N)


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """
    Real control b(t) = sum_k l_k b_k(t).

    Attributes:
        basis (ControlBasis): Basis functions
        coefficients (np.ndarray): Real coefficients l_k
    """

    basis: ControlBasis
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        if coefficients.shape != (self.basis.size,):
            raise ValueError(f"Expected {self.basis.size} coefficients, got {coefficients.shape}")
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zero(cls, size: int = 1) -> "ControlSignal":
        return cls(build_basis(size), np.zeros(size))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    @property
    def coefficient_l1(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t):
        if self.is_zero:
            return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
        values = self.basis.evaluate(t) @ self.coefficients
        return float(values) if np.ndim(t) == 0 else values

    def derivative(self, t):
        values = self.basis.evaluate_derivative(t) @ self.coefficients
        return float(values) if np.ndim(t) == 0 else values

    def moment(self, omega: complex) -> complex:
        """int e^{-iwt} b(t) dt over the support."""
        omega = complex(omega)
        lo, hi = self.basis.support
        cos_part, _ = quad(lambda t: np.exp(omega.imag * t) * np.cos(omega.real * t) * self.evaluate(t),
                           lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        sin_part, _ = quad(lambda t: np.exp(omega.imag * t) * np.sin(omega.real * t) * self.evaluate(t),
                           lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        return complex(cos_part, -sin_part)

    def to_frame(self, dt: float, t_start: float = 0.0, t_end: Optional[float] = None) -> pd.DataFrame:
        """Samples (t, b, b_prime) for inspection."""
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        t_end = self.basis.support[1] + 1.0 if t_end is None else t_end
        t = t_start + dt * np.arange(int(round((t_end - t_start) / dt)) + 1)
        return pd.DataFrame({"t": t, "b": self.evaluate(t), "b_prime": self.derivative(t)})


@dataclass(eq=False)
class MomentSystem:
    """
    Real moment system for the poles below the decay line.

    Attributes:
        poles (List[Pole]): Representatives (imaginary poles and Re w > 0)
        targets (np.ndarray): Complex targets per representative
        basis (ControlBasis): Basis used for the columns
        matrix (np.ndarray): Real constraint rows
        rhs (np.ndarray): Real right-hand side
        solution (Optional[np.ndarray]): Coefficients after synthesis
        coefficient_gain (float): Induced 1-norm of the pseudo-inverse (targets -> l_k)
    """

    poles: List[Pole]
    targets: np.ndarray
    basis: ControlBasis
    matrix: np.ndarray
    rhs: np.ndarray
    solution: Optional[np.ndarray] = None
    coefficient_gain: float = 0.0
    rank: int = 0

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_imaginary(self) -> int:
        return sum(1 for p in self.poles if p.is_imaginary)


def representative_poles(poles: Sequence[Pole]) -> List[Pole]:
    """Imaginary poles and the Re w > 0 member of each pair, in input order."""
    return [p for p in poles if p.is_imaginary or p.omega.real > 0]


def row_count(poles: Sequence[Pole]) -> int:
    reps = representative_poles(poles)
    return sum(1 if p.is_imaginary else 2 for p in reps)


def _row_integral(weight, basis: ControlBasis, k: int) -> float:
    lo, hi = basis.support
    value, _ = quad(lambda t: weight(t) * float(basis.evaluate(t)[k]), lo, hi,
                    epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    return value


def moment_matrix(basis: ControlBasis, poles: Sequence[Pole]) -> np.ndarray:
    """
    Real moment rows for the representative poles.

    Rows: int_2^4 e^{beta t} cos(alpha t) b_k dt and, for complex poles,
    int_2^4 e^{beta t} sin(alpha t) b_k dt.

    Raises:
        RankDeficientError: If the numerical rank is below the row count
    """
    reps = representative_poles(poles)
    rows = []
    for pole in reps:
        alpha, beta = pole.omega.real, pole.omega.imag
        rows.append([_row_integral(lambda t: np.exp(beta * t) * np.cos(alpha * t), basis, k)
                     for k in range(basis.size)])
        if not pole.is_imaginary:
            rows.append([_row_integral(lambda t: np.exp(beta * t) * np.sin(alpha * t), basis, k)
                         for k in range(basis.size)])
    matrix = np.array(rows, dtype=float).reshape(len(rows), basis.size)
    if matrix.shape[0]:
        rank = np.linalg.matrix_rank(matrix)
        if rank < matrix.shape[0]:
            raise RankDeficientError(
                f"Moment matrix rank {rank} < {matrix.shape[0]} rows (N = {basis.size})",
                rank=int(rank), rows=matrix.shape[0])
    return matrix


def _check_pairing(targets: Sequence[PoleTarget]) -> None:
    for target in targets:
        pole, value = target.pole, target.r_target
        scale = max(1.0, abs(value))
        if pole.is_imaginary:
            if abs(value.imag) > PAIRING_TOL * scale:
                raise TargetMismatchError(
                    f"Target at imaginary pole {pole.omega} is not real: {value}", omega=pole.omega)
            continue
        mirror = -pole.omega.conjugate()
        for other in targets:
            if abs(other.pole.omega - mirror) < 1e-8:
                if abs(other.r_target - value.conjugate()) > PAIRING_TOL * scale:
                    raise TargetMismatchError(
                        f"Targets at {pole.omega} and its mirror are not conjugate", omega=pole.omega)


def build_moment_system(targets: Sequence[PoleTarget], basis_size: Optional[int] = None) -> MomentSystem:
    """
    Assemble the real system from pole targets.

    Args:
        targets: One PoleTarget per pole (mirror partners optional but checked if present)
        basis_size: N (default: row count + 4)

    Raises:
        TargetMismatchError: If conjugate pairing or realness is violated
        RankDeficientError: If N is too small or the rows are dependent
    """
    _check_pairing(targets)
    reps = [t for t in targets if t.pole.is_imaginary or t.pole.omega.real > 0]
    poles = [t.pole for t in reps]
    n_rows = row_count(poles)
    size = n_rows + SPARE_COLUMNS if basis_size is None else basis_size
    if size < n_rows:
        raise RankDeficientError(f"Basis size {size} below row count {n_rows}", rows=n_rows, size=size)
    basis = build_basis(size)
    matrix = moment_matrix(basis, poles)
    rhs = []
    for target in reps:
        rhs.append(target.r_target.real)
        if not target.pole.is_imaginary:
            rhs.append(-target.r_target.imag)
    return MomentSystem(poles=poles, targets=np.array([t.r_target for t in reps], dtype=complex),
                        basis=basis, matrix=matrix, rhs=np.array(rhs, dtype=float), rank=n_rows)


def synthesize_control(system: MomentSystem) -> ControlSignal:
    """
    Least-norm real coefficients and a verification of every complex moment.

    Raises:
        RankDeficientError: If the verification pass misses a moment by more than 1e-8
    """
    basis = system.basis
    if system.n_rows == 0:
        system.solution = np.zeros(basis.size)
        system.coefficient_gain = 0.0
        return ControlSignal(basis, system.solution)

    coefficients, _, rank, _ = linalg.lstsq(system.matrix, system.rhs)
    system.solution = np.asarray(coefficients, dtype=float)
    system.rank = int(rank)
    system.coefficient_gain = float(np.linalg.norm(linalg.pinv(system.matrix), 1))
    control = ControlSignal(basis, system.solution)

    for pole, target in zip(system.poles, system.targets):
        achieved = control.moment(pole.omega)
        if abs(achieved - target) > MOMENT_TOL * max(1.0, abs(target)):
            raise RankDeficientError(
                f"Moment at {pole.omega:.6g} reproduced as {achieved:.10g}, target {target:.10g}",
                omega=pole.omega)
    logger.debug(f"Synthesized control: N={basis.size}, rows={system.n_rows}, "
                 f"sum|l|={control.coefficient_l1:.4g}, gain={system.coefficient_gain:.4g}")
    return control


def synthesize_from_targets(targets: Sequence[PoleTarget], basis_size: Optional[int] = None
                            ) -> Tuple[ControlSignal, MomentSystem]:
    """build_moment_system followed by synthesize_control."""
    system = build_moment_system(targets, basis_size)
    return synthesize_control(system), system


if __name__ == "__main__":
    for N in (4, 8, 12):
        print(f"N={N:2d}  cond(Gram) = {build_basis(N).gram_condition():.3e}")
    control = ControlSignal(build_basis(4), np.array([1.0, 0.0, -0.5, 0.0]))
    print("moment at w=0.5i:", control.moment(0.5j))
