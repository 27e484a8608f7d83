"""
Spectral Analysis of the Dissipative Radial Boundary Problem

Locates the poles of the resolvent of psi'' + (1 + w^2) psi = F on [0, L] with
psi(0) = 0 and the dissipative boundary row (iLw - a) psi(L) + aL psi'(L) = 0.

Key Features:
- bracket_root: the square root of w^2 + 1 closest to w
- characteristic_value: D(w), whose zeros are exactly the poles
- find_poles_in_strip: all poles below a decay line, by argument-principle cell
  subdivision at low frequency plus Newton from asymptotic seeds beyond
- find_imaginary_poles: the unstable poles w = -is, s in (0, 1)
- eta_expansion: the boundary coefficient eta and its large-frequency expansion

Root finding works on the entire function

    F(w) = (iLw - a) sin(zL)/z + aL cos(zL),   z^2 = w^2 + 1,

which is even in z and therefore branch free. It relates to D through
D(w) = 2iz e^{izL} F(w), so the two share every zero except the spurious
z = 0 points w = +-i (where F(+-i) = -+L^2 != 0).
"""
import cmath
import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from utils.errors import AtPoleError, DegenerateLError, NonConvergenceError, PoleOnLineError
from utils.logging_config import get_logger

logger = get_logger("spectral")

# Newton / bookkeeping tolerances
NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-12
RESIDUAL_TOL = 1e-10
SIMPLICITY_TOL = 1e-8
DEDUP_TOL = 1e-8
DEGENERATE_L_TOL = 1e-8

# Argument-principle search
AP_FREQUENCY_CELLS = 4.5          # box reaches (K + 1/2) pi / L, between lattice points
AP_BOTTOM = -1.25                 # lower-half-plane poles are imaginary with s < 1
AP_LEFT = -0.1                    # keeps the imaginary axis strictly inside
AP_SPLIT_FRACTIONS = (0.5371, 0.4629, 0.6180, 0.3820, 0.7071)
AP_MAX_DEPTH = 40
PHASE_STEP_MAX = math.pi / 4
CONTOUR_MAX_POINTS = 200_000


class PoleKind(enum.Enum):
    PURELY_IMAGINARY = "purely_imaginary"
    COMPLEX_PAIR_MEMBER = "complex_pair_member"


@dataclass(frozen=True)
class Frequency:
    """
    Complex spectral parameter w = alpha + i*beta with its bracket root.

    Attributes:
        omega (complex): The frequency
        bracket (complex): <w>, the root of w^2 + 1 closest to w
    """

    omega: complex
    bracket: complex

    @classmethod
    def from_omega(cls, omega: complex) -> "Frequency":
        omega = complex(omega)
        return cls(omega=omega, bracket=bracket_root(omega))

    @property
    def alpha(self) -> float:
        return self.omega.real

    @property
    def beta(self) -> float:
        return self.omega.imag


@dataclass(frozen=True)
class Pole:
    """
    A simple zero of the characteristic function.

    Attributes:
        freq (Frequency): Location
        kind (PoleKind): purely imaginary or member of a -conj(w) pair
        char_residual (float): |D(w)| at the returned root
        newton_iters (int): Newton iterations used in the final refinement
    """

    freq: Frequency
    kind: PoleKind
    char_residual: float
    newton_iters: int

    @property
    def omega(self) -> complex:
        return self.freq.omega

    @property
    def is_imaginary(self) -> bool:
        return self.kind is PoleKind.PURELY_IMAGINARY

    def mirror(self) -> "Pole":
        """The partner pole -conj(w) (itself for imaginary poles)."""
        if self.is_imaginary:
            return self
        return Pole(Frequency.from_omega(-self.omega.conjugate()), self.kind,
                    self.char_residual, self.newton_iters)


@dataclass(frozen=True)
class EtaExpansion:
    """
    Boundary coefficient eta and its expansion eta = eta0 + eta1/alpha + O(alpha^-2).

    Attributes:
        eta (complex): Exact value
        eta0, eta1 (complex): Leading and first-order coefficients
        d0 (float): ((1-a)/(1+a)) e^{2L beta}; the series needs d0 < 1
        d1 (complex): c1 ((1-a)/(1+a))^2 e^{2L beta}
        c0 (float): (1+a)/(1-a)
        c1 (complex): -i [2(1+a)L/(1-a) - 4a^2/(L(1-a)^2)]
        omega (complex): Frequency the expansion was taken at
    """

    eta: complex
    eta0: complex
    eta1: complex
    d0: float
    d1: complex
    c0: float
    c1: complex
    omega: complex

    def approximation(self, order: int = 1) -> complex:
        """eta0 (order 0) or eta0 + eta1/alpha (order 1)."""
        if order == 0:
            return self.eta0
        return self.eta0 + self.eta1 / self.omega.real


# ============================================================================
# Elementary pieces
# ============================================================================

def _validate(L: float, a: float) -> None:
    if not (L > 0 and math.isfinite(L)):
        raise ValueError(f"L must be positive, got {L}")
    if not (0.0 < a < 1.0):
        raise ValueError(f"a must lie in (0, 1), got {a}")


def asymptotic_line(L: float, a: float) -> float:
    """beta_inf = (1/2L) log((1+a)/(1-a)), the accumulation line of pole imaginary parts."""
    _validate(L, a)
    return math.log((1.0 + a) / (1.0 - a)) / (2.0 * L)


def default_margin(L: float) -> float:
    """Pole-free margin delta around a target decay line."""
    return 1e-3 * math.pi / L


def bracket_root(omega: complex) -> complex:
    """
    Square root of w^2 + 1 closest to w.

    Ties (purely imaginary w inside (-i, i), including w = 0) are broken
    toward the root with nonnegative real part.

    Example:
        >>> bracket_root(1j)
        0j
        >>> round(bracket_root(3.0).real, 5)
        3.16228
    """
    omega = complex(omega)
    root = cmath.sqrt(omega * omega + 1.0)
    near, far = abs(root - omega), abs(root + omega)
    if far < near:
        root = -root
    elif far == near and (root.real < 0 or (root.real == 0 and root.imag < 0)):
        root = -root
    return root


def bracket_root_array(omega: np.ndarray) -> np.ndarray:
    """Vectorized bracket_root."""
    omega = np.asarray(omega, dtype=complex)
    root = np.sqrt(omega * omega + 1.0)
    near, far = np.abs(root - omega), np.abs(root + omega)
    tie_flip = (far == near) & ((root.real < 0) | ((root.real == 0) & (root.imag < 0)))
    return np.where((far < near) | tie_flip, -root, root)


def characteristic_value(omega: complex, L: float, a: float, flip_branch: bool = False) -> complex:
    """
    D(w) = (iLw - a + iaL<w>) e^{2i<w>L} - (iLw - a - iaL<w>).

    Args:
        omega (complex): Frequency
        L (float): Radius
        a (float): Boundary coefficient in (0, 1)
        flip_branch (bool): Use -<w> instead of <w>; the zero set is unchanged

    Returns:
        complex: D(w)
    """
    _validate(L, a)
    omega = complex(omega)
    z = bracket_root(omega)
    if flip_branch:
        z = -z
    p = 1j * L * omega - a
    return (p + 1j * a * L * z) * cmath.exp(2j * z * L) - (p - 1j * a * L * z)


def _sin_over_z(z: np.ndarray, L: float) -> np.ndarray:
    # sin(zL)/z, equal to L at z = 0
    return L * np.sinc(z * L / np.pi)


def entire_characteristic(omega, L: float, a: float):
    """
    Branch-free characteristic function F(w) = (iLw - a) sin(zL)/z + aL cos(zL).

    Accepts scalars or arrays.
    """
    omega_arr = np.asarray(omega, dtype=complex)
    z = np.sqrt(omega_arr * omega_arr + 1.0)
    value = (1j * L * omega_arr - a) * _sin_over_z(z, L) + a * L * np.cos(z * L)
    return value if value.ndim else complex(value)


def _entire_derivative(omega: complex, L: float, a: float) -> complex:
    omega = complex(omega)
    w = omega * omega + 1.0
    z = cmath.sqrt(w)
    s_val = L if z == 0 else cmath.sin(z * L) / z
    c_val = cmath.cos(z * L)
    if abs(w) * L * L < 1e-3:
        # series of dS/dw around w = 0
        ds_dw = -L ** 3 / 6.0 + L ** 5 * w / 60.0 - L ** 7 * w * w / 1680.0
    else:
        ds_dw = (L * c_val - s_val) / (2.0 * w)
    dc_dw = -0.5 * L * s_val
    return 1j * L * s_val + 2.0 * omega * ((1j * L * omega - a) * ds_dw + a * L * dc_dw)


def characteristic_derivative_at_root(omega: complex, L: float, a: float) -> complex:
    """D'(w) at a zero of F, via D = 2iz e^{izL} F."""
    z = bracket_root(omega)
    return 2j * z * cmath.exp(1j * z * L) * _entire_derivative(omega, L, a)


# ============================================================================
# Newton refinement
# ============================================================================

def _newton(seed: complex, L: float, a: float, max_iter: int = NEWTON_MAX_ITER,
            on_axis: bool = False) -> Tuple[complex, int, bool]:
    omega = complex(seed)
    for iteration in range(1, max_iter + 1):
        f_val = entire_characteristic(omega, L, a)
        df_val = _entire_derivative(omega, L, a)
        if df_val == 0:
            return omega, iteration, False
        step = f_val / df_val
        omega -= step
        if on_axis:
            omega = complex(0.0, omega.imag)
        if not cmath.isfinite(omega):
            return omega, iteration, False
        if abs(step) <= NEWTON_TOL * max(1.0, abs(omega)):
            return omega, iteration, True
    return omega, max_iter, False


def _finalize(omega: complex, iters: int, L: float, a: float, imaginary: bool) -> Pole:
    if imaginary:
        omega = complex(0.0, omega.imag)
    residual = abs(characteristic_value(omega, L, a))
    if residual >= RESIDUAL_TOL:
        raise NonConvergenceError(f"Residual |D| = {residual:.3e} at w = {omega} exceeds tolerance",
                                  omega=omega, residual=residual)
    slope = abs(characteristic_derivative_at_root(omega, L, a))
    if slope <= SIMPLICITY_TOL:
        raise NonConvergenceError(f"Pole at w = {omega} is not simple (|D'| = {slope:.3e})",
                                  omega=omega)
    kind = PoleKind.PURELY_IMAGINARY if imaginary else PoleKind.COMPLEX_PAIR_MEMBER
    return Pole(Frequency.from_omega(omega), kind, residual, iters)


def refine_pole(seed: complex, L: float, a: float) -> Pole:
    """
    Newton-refine a pole from a seed and validate it.

    Raises:
        NonConvergenceError: If Newton does not converge or the root fails validation
    """
    _validate(L, a)
    imaginary = abs(complex(seed).real) < 1e-7
    omega, iters, ok = _newton(complex(0.0, complex(seed).imag) if imaginary else seed,
                               L, a, on_axis=imaginary)
    if not ok:
        raise NonConvergenceError(f"Newton did not converge from seed {seed}", seed=complex(seed))
    return _finalize(omega, iters, L, a, imaginary or abs(omega.real) < 1e-9)


def asymptotic_pole(k: int, L: float, a: float) -> complex:
    """
    Asymptotic location of the k-th pole.

    k*pi/L + i*beta_inf, corrected by (1/(2Lw)) (2a^2/(L(1-a^2)) - L).
    """
    lattice = k * math.pi / L + 1j * asymptotic_line(L, a)
    correction = 2.0 * a * a / (L * (1.0 - a * a)) - L
    return lattice + correction / (2.0 * L * lattice)


# ============================================================================
# Argument principle
# ============================================================================

class _ContourHit(Exception):
    """A zero sits on or too close to a contour edge."""


Rect = Tuple[float, float, float, float]  # (re_min, re_max, im_min, im_max)


def _edge_phase_change(p: complex, q: complex, L: float, a: float) -> float:
    length = abs(q - p)
    m = max(17, int(48 * length * max(L, 1.0) / math.pi) + 17)
    t = np.linspace(0.0, 1.0, m)
    while True:
        values = entire_characteristic(p + t * (q - p), L, a)
        if np.any(np.abs(values) < 1e-13 * (1.0 + L * L)):
            raise _ContourHit()
        dphi = np.angle(values[1:] / values[:-1])
        bad = np.abs(dphi) > PHASE_STEP_MAX
        if not np.any(bad):
            return float(np.sum(dphi))
        if t.size > CONTOUR_MAX_POINTS:
            raise _ContourHit()
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        t = np.sort(np.concatenate([t, mids]))


def _winding(rect: Rect, L: float, a: float) -> int:
    x0, x1, y0, y1 = rect
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = 0.0
    for i in range(4):
        total += _edge_phase_change(corners[i], corners[(i + 1) % 4], L, a)
    turns = total / (2.0 * math.pi)
    count = int(round(turns))
    if abs(turns - count) > 0.1 or count < 0:
        raise _ContourHit()
    return count


def count_zeros(L: float, a: float, rect: Rect) -> int:
    """
    Number of poles inside a rectangle (re_min, re_max, im_min, im_max).

    Raises:
        NonConvergenceError: If a pole lies on the contour
    """
    _validate(L, a)
    try:
        return _winding(rect, L, a)
    except _ContourHit:
        raise NonConvergenceError(f"A pole lies on the boundary of {rect}", rect=str(rect))


def _inside(omega: complex, rect: Rect, pad: float = 1e-9) -> bool:
    x0, x1, y0, y1 = rect
    return x0 - pad <= omega.real <= x1 + pad and y0 - pad <= omega.imag <= y1 + pad


def _split(rect: Rect, fraction: float, L: float) -> Tuple[Rect, Rect]:
    x0, x1, y0, y1 = rect
    # compare widths in units of the lattice spacing vs. absolute heights
    if (x1 - x0) * L / math.pi >= (y1 - y0):
        xm = x0 + fraction * (x1 - x0)
        return (x0, xm, y0, y1), (xm, x1, y0, y1)
    ym = y0 + fraction * (y1 - y0)
    return (x0, x1, y0, ym), (x0, x1, ym, y1)


def _search(rect: Rect, count: int, L: float, a: float, depth: int) -> List[Tuple[complex, int]]:
    if count == 0:
        return []
    if count == 1:
        x0, x1, y0, y1 = rect
        omega, iters, ok = _newton(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), L, a)
        if ok and _inside(omega, rect):
            return [(omega, iters)]
    if depth >= AP_MAX_DEPTH:
        raise NonConvergenceError(f"Could not isolate {count} pole(s) in cell {rect}",
                                  rect=str(rect), count=count)
    for fraction in AP_SPLIT_FRACTIONS:
        first, second = _split(rect, fraction, L)
        try:
            n_first = _winding(first, L, a)
            n_second = _winding(second, L, a)
        except _ContourHit:
            continue
        if n_first + n_second != count:
            continue
        return (_search(first, n_first, L, a, depth + 1)
                + _search(second, n_second, L, a, depth + 1))
    raise NonConvergenceError(f"No admissible split of cell {rect}", rect=str(rect))


def _dedupe(omegas: Sequence[Tuple[complex, int, bool]]) -> List[Tuple[complex, int, bool]]:
    kept: List[Tuple[complex, int, bool]] = []
    for entry in sorted(omegas, key=lambda e: (e[0].imag, e[0].real)):
        if all(abs(entry[0] - other[0]) >= DEDUP_TOL for other in kept):
            kept.append(entry)
    return kept


def find_poles_in_strip(
    L: float,
    a: float,
    beta_max: float,
    alpha_max: float,
    delta: Optional[float] = None,
) -> List[Pole]:
    """
    Find every pole with Im w < beta_max and |Re w| <= alpha_max.

    Low frequencies (|Re w| up to 4.5 pi/L) are searched by argument-principle
    subdivision with Newton inside isolating cells; higher frequencies use
    Newton from the asymptotic lattice seeds. The result is closed under
    w -> -conj(w), sorted by imaginary part.

    Args:
        L (float): Radius
        a (float): Boundary coefficient in (0, 1)
        beta_max (float): Decay line
        alpha_max (float): Frequency cutoff
        delta (Optional[float]): Pole-free margin around beta_max (default 1e-3 pi/L)

    Returns:
        List[Pole]: Poles below the line

    Raises:
        PoleOnLineError: If a pole lies within delta of Im w = beta_max
        NonConvergenceError: If a flagged cell cannot be resolved

    Example:
        >>> poles = find_poles_in_strip(1.0, 0.5, 0.5, 20.0)
        >>> any(p.is_imaginary and p.omega.imag < 0 for p in poles)
        True
    """
    _validate(L, a)
    if alpha_max <= 0:
        raise ValueError(f"alpha_max must be positive, got {alpha_max}")
    delta = default_margin(L) if delta is None else delta
    beta_inf = asymptotic_line(L, a)
    if beta_max >= beta_inf:
        logger.warning(f"beta_max = {beta_max:.6g} is not below the asymptotic line {beta_inf:.6g}; "
                       f"the strip contains poles up to the frequency cutoff only")

    box_right = min(AP_FREQUENCY_CELLS * math.pi / L, alpha_max)
    top = beta_max + delta
    if top <= AP_BOTTOM:
        return []

    # Low frequencies: argument principle
    found: List[Tuple[complex, int, bool]] = []
    rect: Rect = (AP_LEFT, box_right, AP_BOTTOM, top)
    for attempt in range(6):
        nudge = 0.1 * delta * attempt
        rect = (AP_LEFT - nudge, box_right + nudge, AP_BOTTOM - nudge, top + nudge)
        try:
            total = _winding(rect, L, a)
            break
        except _ContourHit:
            continue
    else:
        raise NonConvergenceError("Search box boundary keeps hitting a pole", rect=str(rect))
    logger.debug(f"Argument principle: {total} pole(s) in {rect}")

    for omega, iters in _search(rect, total, L, a, depth=0):
        if abs(omega.real) < 1e-7:
            omega, iters, ok = _newton(complex(0.0, omega.imag), L, a, on_axis=True)
            if not ok:
                raise NonConvergenceError(f"Axis refinement failed near {omega}", omega=omega)
            found.append((complex(0.0, omega.imag), iters, True))
        else:
            found.append((omega, iters, False))

    # High frequencies: asymptotic seeds
    if alpha_max > box_right:
        k_first = max(1, int(math.floor(box_right * L / math.pi)))
        k_last = int(math.ceil(alpha_max * L / math.pi)) + 1
        for k in range(k_first, k_last + 1):
            seed = asymptotic_pole(k, L, a)
            omega, iters, ok = _newton(seed, L, a)
            if not ok:
                omega, iters, ok = _newton(k * math.pi / L + 1j * beta_inf, L, a)
            if not ok:
                raise NonConvergenceError(f"Newton failed from asymptotic seed k = {k}", k=k)
            if box_right < omega.real <= alpha_max and omega.imag < top:
                found.append((omega, iters, False))

    # Mirror, dedupe, filter
    mirrored = list(found)
    for omega, iters, imaginary in found:
        if not imaginary:
            mirrored.append((-omega.conjugate(), iters, False))
    unique = _dedupe(mirrored)

    for omega, _, _ in unique:
        if abs(omega.imag - beta_max) < delta:
            raise PoleOnLineError(
                f"Pole {omega:.8g} lies within {delta:.3g} of the line Im w = {beta_max:.6g}",
                omega=omega, beta_max=beta_max)

    poles = [
        _finalize(omega, iters, L, a, imaginary)
        for omega, iters, imaginary in unique
        if omega.imag < beta_max and abs(omega.real) <= alpha_max
    ]
    logger.info(f"Found {len(poles)} pole(s) below Im w = {beta_max:.6g} "
                f"(L={L}, a={a}, |Re w| <= {alpha_max:g})")
    return poles


# ============================================================================
# Imaginary (unstable) poles
# ============================================================================

def _imaginary_profile(s: float, L: float, a: float) -> float:
    # F(-is) = (Ls - a) S + aL C, real for real s
    w = 1.0 - s * s
    if w > 0:
        q = math.sqrt(w)
        sin_term = L if q * L < 1e-12 else math.sin(q * L) / q
        cos_term = math.cos(q * L)
    else:
        q = math.sqrt(-w)
        sin_term = L if q * L < 1e-12 else math.sinh(q * L) / q
        cos_term = math.cosh(q * L)
    return (L * s - a) * sin_term + a * L * cos_term


def find_imaginary_poles(L: float, a: float, scan_points: int = 4000, s_max: float = 10.0) -> List[float]:
    """
    All s > 0 such that w = -is is a pole.

    Equivalent to tan(L sqrt(1-s^2)) = aL sqrt(1-s^2)/(a - Ls) on (0, 1). The
    real profile (Ls - a) sin(qL)/q + aL cos(qL), q = sqrt(1 - s^2), has no
    singularities at s = a/L or at tangent branch jumps, so sign changes on a
    fine scan bracket every simple root; Brent's method refines them. The
    hyperbolic continuation is scanned on [1, s_max] as well.

    Raises:
        DegenerateLError: If |L - tan L| <= 1e-8 (then w = 0 is a pole)

    Example:
        >>> roots = find_imaginary_poles(1.0, 0.5)
        >>> len(roots), 0 < roots[0] < 0.5
        (1, True)
    """
    _validate(L, a)
    if abs(L - math.tan(L)) <= DEGENERATE_L_TOL:
        raise DegenerateLError(f"L = {L} satisfies L = tan L; zero is a pole", L=L)

    grid = np.concatenate([
        np.linspace(0.0, 1.0, scan_points + 1)[1:-1],
        np.linspace(1.0, s_max, scan_points + 1)[1:],
    ])
    values = np.array([_imaginary_profile(s, L, a) for s in grid])

    roots: List[float] = []
    for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
        root = brentq(_imaginary_profile, grid[i], grid[i + 1], args=(L, a), xtol=1e-15, rtol=4 * np.finfo(float).eps)
        residual = abs(characteristic_value(-1j * root, L, a))
        if residual >= RESIDUAL_TOL:
            raise NonConvergenceError(f"Imaginary root s = {root} has |D| = {residual:.3e}", s=root)
        roots.append(float(root))
    for i in np.nonzero(values == 0.0)[0]:
        roots.append(float(grid[i]))

    roots.sort()
    logger.info(f"Imaginary poles for L={L}, a={a}: {['%.10g' % s for s in roots]}")
    return roots


def classify_instability_case(L: float, a: float) -> Optional[int]:
    """
    Which existence argument for an unstable pole applies to (L, a).

    1: 2L mod 2pi in [pi/2, pi]; 2: L > 1; 3: a < L < 1; 4: a = L < 1;
    5: L < a < 1. The small-L cases (4, 5, 3) are tested first, then 1 and 2.

    Example:
        >>> [classify_instability_case(L, a) for L, a in [(1, .5), (2, .9), (.8, .3), (.5, .5), (.3, .6)]]
        [1, 2, 3, 4, 5]
    """
    _validate(L, a)
    if L < 1.0:
        if abs(a - L) <= 1e-12:
            return 4
        if L < a:
            return 5
        if a < L:
            return 3
    if math.pi / 2 <= math.fmod(2.0 * L, 2.0 * math.pi) <= math.pi:
        return 1
    if L > 1.0:
        return 2
    return None


# ============================================================================
# Eta expansion
# ============================================================================

def eta_value(omega: complex, L: float, a: float) -> complex:
    """
    Exact eta for phi2 = i sin(<w>r) + eta cos(<w>r).

    eta = -i [(iLw - a) sin(zL) + aLz cos(zL)] / [(iLw - a) cos(zL) - aLz sin(zL)]
    """
    z = bracket_root(omega)
    p = 1j * L * complex(omega) - a
    numerator = p * cmath.sin(z * L) + a * L * z * cmath.cos(z * L)
    denominator = p * cmath.cos(z * L) - a * L * z * cmath.sin(z * L)
    return -1j * numerator / denominator


def eta_expansion(omega: complex, L: float, a: float) -> EtaExpansion:
    """
    Exact eta together with the large-alpha expansion coefficients.

    The expansion fields are closed forms valid for any w; they approximate
    eta when alpha = Re w >= 1 and d0 < 1.

    Raises:
        AtPoleError: If |eta| < 1e-12

    Example:
        >>> exp = eta_expansion(500 + 0.1j, 1.0, 0.5)
        >>> abs(exp.eta - exp.approximation(1)) < 1e-5
        True
    """
    _validate(L, a)
    omega = complex(omega)
    eta = eta_value(omega, L, a)
    if abs(eta) < 1e-12:
        raise AtPoleError(f"w = {omega} is a pole (|eta| = {abs(eta):.3e})", omega=omega)

    alpha, beta = omega.real, omega.imag
    ratio = (1.0 - a) / (1.0 + a)
    c0 = (1.0 + a) / (1.0 - a)
    c1 = -1j * (2.0 * (1.0 + a) * L / (1.0 - a) - 4.0 * a * a / (L * (1.0 - a) ** 2))
    d0 = ratio * math.exp(2.0 * L * beta)
    d1 = c1 * ratio ** 2 * math.exp(2.0 * L * beta)
    x = cmath.exp(-2j * L * alpha)
    eta0 = (-1.0 + d0 * x) / (1.0 + d0 * x)
    eta1 = d1 * x / (1.0 + d0 * x) ** 2
    return EtaExpansion(eta=eta, eta0=eta0, eta1=eta1, d0=d0, d1=d1, c0=c0, c1=c1, omega=omega)


if __name__ == "__main__":
    from utils.logging_config import setup_logging

    setup_logging("INFO")
    print("beta_inf(L=1, a=0.5) =", asymptotic_line(1.0, 0.5))
    print("imaginary poles:", find_imaginary_poles(1.0, 0.5))
    for pole in find_poles_in_strip(1.0, 0.5, beta_max=0.5, alpha_max=30.0):
        print(f"{pole.omega:.10f}  {pole.kind.value}  |D|={pole.char_residual:.2e}")
