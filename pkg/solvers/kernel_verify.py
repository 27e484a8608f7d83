"""
Kernel Verification Suite

Numerical checks for the analytic machinery behind the decay estimates:

- the oscillatory tail kernels h, k and Q (sine/cosine integrals, no quadrature)
- the truncated Hilbert transform and its L2 bound
- the large-alpha expansion orders of eta, Gamma and Gamma_r
- the five oscillatory integrals of the H1 decay estimate as r -> 0

Every check produces a VerificationCheck; run_verification_suite bundles them
into a JSON-friendly report.

Conventions:
    w = alpha + i beta, e^{+-}(r) = e^{iwr} +- e^{-iwr}
"""
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import special
from scipy.integrate import quad, trapezoid

from solvers.greens import build_kernel
from solvers.spectral import asymptotic_line, eta_expansion
from utils.logging_config import get_logger, metrics_tracker

logger = get_logger("kernel_verify")

PROBE_POINTS = 400
PROBE_RANGE = (1e-6, 10.0)
ALPHA_POINTS = 200
ALPHA_RANGE = (10.0, 1000.0)
ORDER_BINS = 10
ORDER_TOL = 0.1
HILBERT_SLACK = 0.05
NODE_TOL = 1e-14


# ============================================================================
# Tail kernels
# ============================================================================

def _check_cutoff(A: float) -> None:
    if not A >= 1.0:
        raise ValueError(f"Frequency cutoff A must be >= 1, got {A}")


def _out(value: np.ndarray):
    return value.item() if value.ndim == 0 else value


def kernel_h(p, A: float = 1.0):
    """
    h(p) = int_A^inf e^{ip alpha} / alpha d alpha = -Ci(|p|A) + i sign(p) (pi/2 - Si(|p|A)).

    Raises:
        ValueError: At p = 0, where the real part diverges
    """
    _check_cutoff(A)
    p = np.asarray(p, dtype=float)
    if np.any(p == 0.0):
        raise ValueError("h(p) diverges at p = 0")
    si, ci = special.sici(np.abs(p) * A)
    return _out(-ci + 1j * np.sign(p) * (0.5 * np.pi - si))


def kernel_k(p, A: float = 1.0):
    """
    k(p) = int_A^inf sin(p alpha) / alpha d alpha = sign(p) (pi/2 - Si(|p|A)).

    Example:
        >>> kernel_k(0.0)
        0.0
    """
    _check_cutoff(A)
    p = np.asarray(p, dtype=float)
    si, _ = special.sici(np.abs(p) * A)
    return _out(np.sign(p) * (0.5 * np.pi - si))


def kernel_k_derivative(p, A: float = 1.0):
    """k'(p) = -sin(pA) / p, with the limit -A at p = 0."""
    _check_cutoff(A)
    p = np.asarray(p, dtype=float)
    safe = np.where(p == 0.0, 1.0, p)
    return _out(np.where(p == 0.0, -A, -np.sin(safe * A) / safe))


def kernel_Q(p, A: float = 1.0):
    """Q(p) = int_{|alpha| > A} e^{ip alpha} / alpha^2 d alpha = 2 [cos(pA)/A - p k(p)]."""
    _check_cutoff(A)
    p = np.asarray(p, dtype=float)
    si, _ = special.sici(np.abs(p) * A)
    return _out(2.0 * (np.cos(p * A) / A - np.abs(p) * (0.5 * np.pi - si)))


def kernel_Q_derivative(p, A: float = 1.0):
    """Q'(p) = -2 k(p)."""
    return _out(-2.0 * np.asarray(kernel_k(p, A)))


@dataclass(frozen=True, eq=False)
class KernelProbe:
    """
    Kernel values on a probe grid with the fitted bound constant.

    c0 is the smallest constant with |k|, |k'| <= c0 and
    |h| <= max(c0, |log|p||) on the grid.

    Attributes:
        A (float): Frequency cutoff
        p (np.ndarray): Probe points (both signs, no zero)
        h, k, k_prime, Q (np.ndarray): Kernel values
        c0 (float): Fitted bound constant
    """

    A: float
    p: np.ndarray
    h: np.ndarray
    k: np.ndarray
    k_prime: np.ndarray
    Q: np.ndarray
    c0: float

    @classmethod
    def build(cls, A: float = 1.0, n_points: int = PROBE_POINTS,
              p_range: Tuple[float, float] = PROBE_RANGE) -> "KernelProbe":
        half = np.logspace(math.log10(p_range[0]), math.log10(p_range[1]), n_points // 2)
        p = np.concatenate([-half[::-1], half])
        h = kernel_h(p, A)
        k = kernel_k(p, A)
        k_prime = kernel_k_derivative(p, A)
        above_log = np.abs(h) > np.abs(np.log(np.abs(p)))
        h_excess = float(np.max(np.abs(h[above_log]))) if np.any(above_log) else 0.0
        c0 = max(float(np.max(np.abs(k))), float(np.max(np.abs(k_prime))), h_excess)
        return cls(A=A, p=p, h=h, k=k, k_prime=k_prime, Q=kernel_Q(p, A), c0=c0)

    def check_bounds(self, p, c0: Optional[float] = None, slack: float = 0.05) -> Dict[str, bool]:
        """Bound checks at other points p (p != 0) against c0 * (1 + slack)."""
        bound = (self.c0 if c0 is None else c0) * (1.0 + slack)
        p = np.asarray(p, dtype=float)
        log_p = np.abs(np.log(np.abs(p)))
        return {
            "k": bool(np.all(np.abs(kernel_k(p, self.A)) <= bound)),
            "k_prime": bool(np.all(np.abs(kernel_k_derivative(p, self.A)) <= bound)),
            "h": bool(np.all(np.abs(kernel_h(p, self.A)) <= np.maximum(bound, log_p))),
        }


# ============================================================================
# Truncated Hilbert transform
# ============================================================================

def hilbert_truncated(f: np.ndarray, t: float, L: float) -> np.ndarray:
    """
    g(r) = PV int_0^L f(s) / (t + r - s) ds at the sample nodes r.

    f is taken piecewise linear between its samples on a uniform grid of
    [0, L] and integrated exactly. On a panel, f(s) = v(x) - m (x - s) with
    x = t + r and v the panel's linear extension, so the panel gives
    v(x) log|(x - s_left)/(x - s_right)| - m ds. The log terms are regrouped
    per node; at a node hit by x the regrouped coefficient vanishes and the
    term is dropped.

    Args:
        f (np.ndarray): Samples on linspace(0, L, n)
        t (float): Shift
        L (float): Interval length; fixes the sample nodes, which f alone does not

    Returns:
        np.ndarray: g at the same nodes
    """
    f = np.asarray(f, dtype=float)
    n = f.size
    if n < 2:
        raise ValueError("Need at least two samples")
    s = np.linspace(0.0, L, n)
    x = t + s
    slopes = np.diff(f) / np.diff(s)
    v = f[:-1][None, :] + slopes[None, :] * (x[:, None] - s[:-1][None, :])
    coeff = np.empty((n, n))
    coeff[:, 0] = v[:, 0]
    coeff[:, 1:-1] = v[:, 1:] - v[:, :-1]
    coeff[:, -1] = -v[:, -1]
    dist = np.abs(x[:, None] - s[None, :])
    logs = np.log(np.where(dist > NODE_TOL * L, dist, 1.0))
    # sum of m * ds telescopes to f(L) - f(0)
    return np.sum(coeff * logs, axis=1) - (f[-1] - f[0])


def hilbert_norm_ratio(f: np.ndarray, t: float, L: float) -> float:
    """||g||_{L2(0,L)} / ||f||_{L2(0,L)}; at most pi in the continuum."""
    s = np.linspace(0.0, L, len(f))
    g = hilbert_truncated(f, t, L)
    f_norm = math.sqrt(trapezoid(np.asarray(f) ** 2, s))
    if f_norm == 0.0:
        return 0.0
    return math.sqrt(trapezoid(g ** 2, s)) / f_norm


# ============================================================================
# Expansion orders
# ============================================================================

@dataclass(frozen=True)
class OrderFit:
    """
    Fitted decay exponent of an expansion residual.

    The residual is scaled by alpha^expected, its maximum is taken in each of
    ORDER_BINS consecutive alpha bins and log(max) is fitted against log(alpha);
    the exponent is expected minus that slope.
    """

    name: str
    exponent: float
    expected: float
    max_scaled_residual: float

    @property
    def passed(self) -> bool:
        return abs(self.exponent - self.expected) <= ORDER_TOL


def _alpha_grid(alpha_range: Tuple[float, float], n_alpha: int) -> np.ndarray:
    lo, hi = alpha_range
    if not (1.0 <= lo < hi):
        raise ValueError(f"alpha range must satisfy 1 <= lo < hi, got {alpha_range}")
    return np.logspace(math.log10(lo), math.log10(hi), n_alpha)


def _binned_exponent(name: str, alphas: np.ndarray, residuals: np.ndarray, expected: float,
                     n_bins: int = ORDER_BINS) -> OrderFit:
    scaled = np.asarray(residuals) * alphas ** expected
    centers, peaks = [], []
    for idx in np.array_split(np.arange(alphas.size), n_bins):
        centers.append(math.exp(float(np.mean(np.log(alphas[idx])))))
        peaks.append(max(float(np.max(scaled[idx])), 1e-300))
    slope = float(np.polyfit(np.log(centers), np.log(peaks), 1)[0])
    fit = OrderFit(name=name, exponent=expected - slope, expected=expected,
                   max_scaled_residual=float(np.max(scaled)))
    logger.debug(f"{name}: exponent {fit.exponent:.4f} (expected {expected})")
    return fit


def _check_beta_below_line(L: float, a: float, beta: float) -> None:
    beta_inf = asymptotic_line(L, a)
    if not beta < beta_inf:
        raise ValueError(f"beta must lie below the asymptotic line {beta_inf:.6g}, got {beta}")


def check_eta_order(L: float, a: float, beta: float,
                    alpha_range: Tuple[float, float] = ALPHA_RANGE,
                    n_alpha: int = ALPHA_POINTS, order: int = 1) -> OrderFit:
    """
    Decay exponent of |eta - eta0 - eta1/alpha| (order 1) or |eta - eta0| (order 0).

    Expected exponents: 2 for order 1, 1 for order 0.
    """
    _check_beta_below_line(L, a, beta)
    alphas = _alpha_grid(alpha_range, n_alpha)
    residuals = np.empty(alphas.size)
    for i, alpha in enumerate(alphas):
        expansion = eta_expansion(complex(alpha, beta), L, a)
        residuals[i] = abs(expansion.eta - expansion.approximation(order))
    return _binned_exponent(f"eta_order_{order}", alphas, residuals, float(order + 1))


def _e_minus_plus(omega: complex, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    up = np.exp(1j * omega * x)
    down = np.exp(-1j * omega * x)
    return up - down, up + down


def reduced_gamma(omega: complex, eta0: complex, r, s) -> np.ndarray:
    """
    4 Gamma~(r, s) = i/(alpha eta0) e^-(min) (e^-(max) + eta0 e^+(max)).
    """
    r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
    lo, hi = np.minimum(r, s), np.maximum(r, s)
    em_lo, _ = _e_minus_plus(omega, lo)
    em_hi, ep_hi = _e_minus_plus(omega, hi)
    return 1j / (omega.real * eta0) * em_lo * (em_hi + eta0 * ep_hi)


def reduced_gamma_r(omega: complex, eta0: complex, r, s) -> np.ndarray:
    """d/dr of 4 Gamma~ on each branch."""
    r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
    em_r, ep_r = _e_minus_plus(omega, r)
    em_s, ep_s = _e_minus_plus(omega, s)
    factor = -omega / omega.real
    lower = factor * em_s * (ep_r / eta0 + em_r)      # s <= r
    upper = factor * ep_r * (em_s / eta0 + ep_s)      # r < s
    return np.where(s <= r, lower, upper)


def gamma_r_first_order(omega: complex, eta0: complex, eta1: complex, r, s) -> np.ndarray:
    """
    Coefficient M with 4 Gamma_r - 4 Gamma~_r = M / alpha + O(alpha^-2).
    """
    r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
    beta = omega.imag
    em_r, ep_r = _e_minus_plus(omega, r)
    em_s, ep_s = _e_minus_plus(omega, s)
    drift = eta1 / eta0 ** 2 * ep_r * em_s
    lower = (drift
             - 0.5j * r * em_s * (em_r / eta0 + ep_r)
             - 0.5j * s * ep_s * (ep_r / eta0 + em_r)
             + 1j * beta * em_s * (ep_r / eta0 + em_r))
    upper = (drift
             - 0.5j * s * ep_r * (ep_s / eta0 + em_s)
             - 0.5j * r * em_r * (em_s / eta0 + ep_s)
             + 1j * beta * ep_r * (em_s / eta0 + ep_s))
    return np.where(s <= r, lower, upper)


def exact_gamma_r(kernel, r, s) -> np.ndarray:
    """4 Gamma_r(r, s) from the kernel's solutions."""
    r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
    lower = kernel.phi1_at(s) * kernel.dphi2_at(r)
    upper = kernel.dphi1_at(r) * kernel.phi2_at(s)
    return 4.0 * np.where(s <= r, lower, upper) / kernel.cg


@dataclass(frozen=True)
class GammaExpansionReport:
    """
    Expansion checks for the Green's function.

    Attributes:
        gamma (OrderFit): |4 Gamma - 4 Gamma~|, expected exponent 2
        gamma_r (OrderFit): |4 Gamma_r - 4 Gamma~_r - M/alpha|, expected exponent 2
        conjugate_error (float): Relative max |X(-conj w) - conj X(w)| over Gamma and Gamma~
        diagonal_error (float): Max gap between the two Gamma~ branches at r = s
    """

    gamma: OrderFit
    gamma_r: OrderFit
    conjugate_error: float
    diagonal_error: float


def random_pairs(L: float, n_pairs: int = 20, seed: int = 0, lower: bool = True) -> np.ndarray:
    """(r, s) pairs in (0, L)^2, with s <= r when lower is set."""
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(0.0, L, size=(n_pairs, 2))
    if lower:
        pairs = np.sort(pairs, axis=1)[:, ::-1]
    return pairs


def check_gamma_expansion(L: float, a: float, beta: float,
                          alpha_range: Tuple[float, float] = ALPHA_RANGE,
                          pairs: Optional[np.ndarray] = None,
                          n_alpha: int = ALPHA_POINTS, seed: int = 0) -> GammaExpansionReport:
    """
    Decay exponents of the Gamma and Gamma_r residuals over sampled (r, s) pairs.

    Args:
        L, a (float): Problem parameters
        beta (float): Im w, below the asymptotic line
        alpha_range (Tuple[float, float]): alpha interval, log-spaced
        pairs (Optional[np.ndarray]): (r, s) rows; default 20 random pairs with s <= r
        n_alpha (int): Number of alpha values
        seed (int): Seed for the default pairs

    Returns:
        GammaExpansionReport: Fits plus symmetry and diagonal checks
    """
    _check_beta_below_line(L, a, beta)
    pairs = random_pairs(L, seed=seed) if pairs is None else np.asarray(pairs, dtype=float)
    r, s = pairs[:, 0], pairs[:, 1]
    alphas = _alpha_grid(alpha_range, n_alpha)
    gamma_res = np.empty(alphas.size)
    gamma_r_res = np.empty(alphas.size)
    conjugate_error = 0.0
    diagonal_error = 0.0

    for i, alpha in enumerate(alphas):
        omega = complex(alpha, beta)
        expansion = eta_expansion(omega, L, a)
        kernel = build_kernel(omega, L, a)
        exact = 4.0 * kernel.gamma(r, s)
        reduced = reduced_gamma(omega, expansion.eta0, r, s)
        gamma_res[i] = float(np.max(np.abs(exact - reduced)))

        model = gamma_r_first_order(omega, expansion.eta0, expansion.eta1, r, s)
        remainder = exact_gamma_r(kernel, r, s) - reduced_gamma_r(omega, expansion.eta0, r, s) - model / alpha
        gamma_r_res[i] = float(np.max(np.abs(remainder)))

        if i % (max(n_alpha // ORDER_BINS, 1)) == 0:
            mirror = -omega.conjugate()
            mirror_expansion = eta_expansion(mirror, L, a)
            mirror_kernel = build_kernel(mirror, L, a)
            scale = max(float(np.max(np.abs(exact))), 1e-300)
            gap_exact = np.max(np.abs(4.0 * mirror_kernel.gamma(r, s) - np.conj(exact)))
            gap_reduced = np.max(np.abs(reduced_gamma(mirror, mirror_expansion.eta0, r, s) - np.conj(reduced)))
            conjugate_error = max(conjugate_error, float(max(gap_exact, gap_reduced)) / scale)

            em, ep = _e_minus_plus(omega, r)
            upper_branch = 1j / (alpha * expansion.eta0) * em * (em + expansion.eta0 * ep)
            diagonal_error = max(diagonal_error,
                                 float(np.max(np.abs(reduced_gamma(omega, expansion.eta0, r, r) - upper_branch))))

    return GammaExpansionReport(
        gamma=_binned_exponent("gamma_order", alphas, gamma_res, 2.0),
        gamma_r=_binned_exponent("gamma_r_order", alphas, gamma_r_res, 2.0),
        conjugate_error=conjugate_error,
        diagonal_error=diagonal_error,
    )


# ============================================================================
# H1 decay integrals
# ============================================================================

# (name, first factor, second factor, power of 1/alpha, branch)
# factors are (variable, sign) with e^{sign}; branch "lower" means s <= r.
# Five integrals; the 1/alpha^2 one carries e^{+-}(s) and is split into one row per sign.
H1_INTEGRALS = (
    ("minus_s_minus_r_lower", ("s", -1), ("r", -1), 1, "lower"),
    ("minus_s_plus_r_lower", ("s", -1), ("r", 1), 1, "lower"),
    ("minus_s_minus_r_upper", ("s", -1), ("r", -1), 1, "upper"),
    ("minus_r_plus_s_upper", ("r", -1), ("s", 1), 1, "upper"),
    ("minus_r_plus_s_upper_sq", ("r", -1), ("s", 1), 2, "upper"),
    ("minus_r_minus_s_upper_sq", ("r", -1), ("s", -1), 2, "upper"),
)


def h1_integral(t: float, r: float, s: float, beta: float, A: float,
                first: Tuple[str, int], second: Tuple[str, int], power: int) -> complex:
    """
    (1/r) int_{|alpha| > A} e^{it alpha} alpha^-power e^{first}(x) e^{second}(y) d alpha.

    Each e^{+-} product splits into four pure exponentials e^{-beta q} e^{i alpha q}
    with q = +-x +- y; the alpha integral of each is 2i k(t + q) for power 1
    and Q(t + q) for power 2.
    """
    values = {"r": r, "s": s}
    x, sign_x = values[first[0]], first[1]
    y, sign_y = values[second[0]], second[1]
    total = 0.0 + 0.0j
    for ex in (1, -1):
        cx = 1.0 if ex == 1 else float(sign_x)
        for ey in (1, -1):
            cy = 1.0 if ey == 1 else float(sign_y)
            q = ex * x + ey * y
            weight = cx * cy * math.exp(-beta * q)
            if power == 1:
                total += weight * 2j * kernel_k(t + q, A)
            else:
                total += weight * kernel_Q(t + q, A)
    return total / r


@dataclass(frozen=True)
class H1IntegralReport:
    """
    Sampled values of the H1 decay integrals.

    Attributes:
        max_abs (Dict[str, float]): Largest |value| per integral over all samples
        reference (Dict[str, float]): Largest |value| over samples with r >= 1e-2
        passed (Dict[str, bool]): Shrinking r tenfold never grows |value| beyond
            2 |value| + 0.1 * reference
    """

    max_abs: Dict[str, float]
    reference: Dict[str, float]
    passed: Dict[str, bool]

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())


def check_h1_integrals(L: float, a: float, beta: float, A: float = 1.0, samples: int = 50,
                       seed: int = 0, r_min: float = 1e-4) -> H1IntegralReport:
    """
    Evaluate the H1 decay integrals at random (t, r, s) and check that they stay bounded as r -> 0.

    t is drawn with |t| >= 2L + 1/2 so that every phase t +- r +- s keeps the
    sign of t; the tail kernel k jumps by pi at zero and the pointwise bound
    is only claimed away from that set.
    """
    _check_beta_below_line(L, a, beta)
    _check_cutoff(A)
    rng = np.random.default_rng(seed)
    t_vals = rng.choice([-1.0, 1.0], size=samples) * (2.0 * L + 0.5 + 5.0 * rng.uniform(size=samples))
    r_vals = np.exp(rng.uniform(math.log(r_min), math.log(L), size=samples))
    shape = rng.uniform(size=samples)

    max_abs: Dict[str, float] = {}
    reference: Dict[str, float] = {}
    passed: Dict[str, bool] = {}
    for name, first, second, power, branch in H1_INTEGRALS:
        def evaluate(t, r, u):
            # lower: s = u r <= r; upper: s between r and L
            s = u * r if branch == "lower" else r + u * (L - r)
            return abs(h1_integral(t, r, s, beta, A, first, second, power))

        values = np.array([evaluate(t, r, u) for t, r, u in zip(t_vals, r_vals, shape)])
        max_abs[name] = float(np.max(values))
        ref = values[r_vals >= 1e-2]
        reference[name] = float(np.max(ref)) if ref.size else max_abs[name]
        ok = True
        for t, r, u, value in zip(t_vals, r_vals, shape, values):
            if r > 1e-2:
                continue
            if evaluate(t, r / 10.0, u) > 2.0 * value + 0.1 * reference[name]:
                ok = False
                break
        passed[name] = ok
    logger.debug(f"H1 integrals: {max_abs}")
    return H1IntegralReport(max_abs=max_abs, reference=reference, passed=passed)


# ============================================================================
# Suite
# ============================================================================

@dataclass(frozen=True)
class VerificationCheck:
    name: str
    value: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "pass": self.passed, "detail": self.detail}


@dataclass
class VerificationReport:
    """All checks of one suite run."""
    parameters: Dict[str, float]
    checks: List[VerificationCheck] = field(default_factory=list)
    c0: float = math.nan

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, value: float, passed: bool, detail: str = "") -> None:
        self.checks.append(VerificationCheck(name, float(value), bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "parameters": self.parameters,
            "c0": self.c0,
            "all_passed": self.all_passed,
            "checks": [check.to_dict() for check in self.checks],
        }


def _quad_tail(p: float, A: float, weight: str) -> float:
    value, _ = quad(lambda x: 1.0 / x, A, np.inf, weight=weight, wvar=p, epsabs=1e-13, limlst=100)
    return value


def _random_profile(rng: np.random.Generator, s: np.ndarray, L: float, modes: int = 5) -> np.ndarray:
    coeffs = rng.normal(size=modes)
    return sum(c * np.sin((k + 1) * np.pi * s / L) for k, c in enumerate(coeffs))


def run_verification_suite(L: float = 1.0, a: float = 0.5, beta: float = 0.1, A: float = 1.0,
                           seed: int = 0, hilbert_draws: int = 100,
                           hilbert_points: int = 401) -> VerificationReport:
    """
    Run every kernel, Hilbert and expansion check.

    Returns:
        VerificationReport: One entry per check with its value and pass flag
    """
    started = time.time()
    report = VerificationReport(parameters={"L": L, "a": a, "beta": beta, "A": A, "seed": seed})

    # Tail kernels
    probe = KernelProbe.build(A)
    report.c0 = probe.c0
    midpoints = np.sqrt(probe.p[1:] * probe.p[:-1])
    midpoints = midpoints[np.isfinite(midpoints) & (midpoints > 0)]
    bounds = probe.check_bounds(np.concatenate([-midpoints, midpoints]))
    for key, ok in bounds.items():
        report.add(f"kernel_bound_{key}", probe.c0, ok, "|k|, |k'| <= c0 and |h| <= max(c0, |log|p||)")
    report.add("kernel_k_at_zero", kernel_k(0.0, A), kernel_k(0.0, A) == 0.0)
    small = abs(kernel_k(1e-9, A) - 0.5 * math.pi)
    report.add("kernel_k_small_p_limit", small, small < 1e-8, "k(p) -> pi/2 as p -> 0+")
    large = abs(kernel_k(1e6, A))
    report.add("kernel_k_large_p_limit", large, large < 1e-5, "k(p) -> 0 as p -> inf")
    worst = 0.0
    for p in (0.5, 1.7, 4.0):
        worst = max(worst, abs(kernel_k(p, A) - _quad_tail(p, A, "sin")),
                    abs(kernel_h(p, A).real - _quad_tail(p, A, "cos")))
    report.add("kernel_vs_quadrature", worst, worst < 1e-8)
    delta = 1e-5
    p_fd = np.array([-3.1, -0.7, 0.4, 1.3, 6.2])
    fd = (kernel_Q(p_fd + delta, A) - kernel_Q(p_fd - delta, A)) / (2.0 * delta)
    gap = float(np.max(np.abs(fd - kernel_Q_derivative(p_fd, A))))
    report.add("kernel_Q_derivative", gap, gap < 1e-6, "Q' = -2k")

    # Hilbert transform
    rng = np.random.default_rng(seed)
    s = np.linspace(0.0, L, hilbert_points)
    zero = float(np.max(np.abs(hilbert_truncated(np.zeros_like(s), 0.3, L))))
    report.add("hilbert_zero", zero, zero == 0.0)
    t_out = L + 0.5
    x = t_out + s
    oracle = x * np.log(np.abs(x / (x - L))) - L
    linear_gap = float(np.max(np.abs(hilbert_truncated(s, t_out, L) - oracle)))
    report.add("hilbert_linear_oracle", linear_gap, linear_gap < 1e-9)
    ratios = [hilbert_norm_ratio(_random_profile(rng, s, L), float(rng.uniform(-L, L)), L)
              for _ in range(hilbert_draws)]
    report.add("hilbert_norm_ratio", max(ratios), max(ratios) <= math.pi + HILBERT_SLACK, "<= pi + 0.05")

    # Expansion orders
    for order in (1, 0):
        fit = check_eta_order(L, a, beta, order=order)
        report.add(fit.name, fit.exponent, fit.passed, f"expected {fit.expected:g}")
    d0 = eta_expansion(complex(ALPHA_RANGE[0], beta), L, a).d0
    report.add("eta_d0_below_one", d0, d0 < 1.0)
    gamma = check_gamma_expansion(L, a, beta, seed=seed)
    report.add(gamma.gamma.name, gamma.gamma.exponent, gamma.gamma.passed, "expected 2")
    report.add(gamma.gamma_r.name, gamma.gamma_r.exponent, gamma.gamma_r.passed, "expected 2")
    report.add("gamma_conjugate_symmetry", gamma.conjugate_error, gamma.conjugate_error < 1e-10)
    report.add("gamma_diagonal", gamma.diagonal_error, gamma.diagonal_error < 1e-12)

    # H1 integrals
    h1 = check_h1_integrals(L, a, beta, A, seed=seed)
    for name, ok in h1.passed.items():
        report.add(f"h1_{name}", h1.max_abs[name], ok, "bounded as r -> 0")

    elapsed = time.time() - started
    metrics_tracker.record("verification_time", elapsed)
    n_passed = sum(check.passed for check in report.checks)
    logger.info(f"Verification suite: {n_passed}/{len(report.checks)} checks passed in {elapsed:.1f}s")
    return report


if __name__ == "__main__":
    import json

    from utils.logging_config import setup_logging

    setup_logging("INFO")
    print(json.dumps(run_verification_suite().to_dict(), indent=2))
