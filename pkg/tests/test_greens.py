import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.linalg import svdvals

from solvers.greens import (
    STANDARD_CUTOFF,
    FourierAccumulator,
    SourceData,
    build_kernel,
    bvp_matrix,
    fourier_source,
    fourier_sources,
    pole_compatibility,
    resolve_elliptic,
    solve_direct_bvp,
)
from solvers.radial_core import RadialGrid, RadialState
from solvers.spectral import find_imaginary_poles
from utils.errors import AtPoleError, InsufficientHistoryError

L, A = 1.0, 0.5

non_poles = st.builds(
    complex,
    st.floats(min_value=0.3, max_value=8.0),
    st.floats(min_value=-0.5, max_value=0.5),
)


def _random_source(grid: RadialGrid, seed: int) -> SourceData:
    rng = np.random.default_rng(seed)
    r = grid.nodes
    coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)
    F = r * (coeffs[0] + coeffs[1] * r + coeffs[2] * np.cos(3.0 * r)) * np.exp(-r)
    return SourceData(grid, F, B=coeffs[3])


def test_cutoff_profile():
    chi = STANDARD_CUTOFF
    assert chi.value(0.5) == 0.0
    assert chi.value(2.5) == 1.0
    assert chi.value(1.5) == pytest.approx(0.5)
    t = np.linspace(0.0, 3.0, 30001)
    assert trapezoid(chi.d1(t), t) == pytest.approx(1.0, abs=1e-9)
    assert trapezoid(chi.d2(t), t) == pytest.approx(0.0, abs=1e-9)


def test_cutoff_derivative_matches_difference_quotient():
    chi = STANDARD_CUTOFF
    h = 1e-6
    for t in (1.2, 1.5, 1.8):
        assert chi.d1(t) == pytest.approx((chi.value(t + h) - chi.value(t - h)) / (2 * h), rel=1e-6)
        assert chi.d2(t) == pytest.approx((chi.d1(t + h) - chi.d1(t - h)) / (2 * h), rel=1e-5, abs=1e-6)


def test_source_must_vanish_at_origin():
    grid = RadialGrid(L, 11)
    with pytest.raises(ValueError):
        SourceData(grid, np.ones(11))


@given(non_poles)
@settings(max_examples=40, deadline=None)
def test_kernel_wronskian_and_boundary(omega):
    kernel = build_kernel(omega, L, A)
    for r in (0.1, 0.5, 0.9):
        wronskian = kernel.phi1_at(r) * kernel.dphi2_at(r) - kernel.dphi1_at(r) * kernel.phi2_at(r)
        assert wronskian == pytest.approx(kernel.cg, rel=1e-9)
    assert abs(kernel.boundary_residual()) < 1e-10 * (1.0 + abs(kernel.eta)) * (1.0 + abs(omega))


@given(non_poles, st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=40, deadline=None)
def test_gamma_symmetries(omega, r, s):
    kernel = build_kernel(omega, L, A)
    mirrored = build_kernel(-omega.conjugate(), L, A)
    value = kernel.gamma(r, s)
    assert value == pytest.approx(kernel.gamma(s, r))
    assert mirrored.gamma(r, s) == pytest.approx(np.conj(value), rel=1e-9, abs=1e-12)


def test_kernel_rejects_poles():
    s = find_imaginary_poles(L, A)[0]
    with pytest.raises(AtPoleError):
        build_kernel(-1j * s, L, A)
    with pytest.raises(ValueError):
        build_kernel(1j, L, A)


@pytest.mark.parametrize("seed", range(10))
def test_greens_solve_matches_direct_solve(seed):
    rng = np.random.default_rng(100 + seed)
    omega = complex(rng.uniform(0.3, 1.5), rng.uniform(-1.0, -0.4))
    grid = RadialGrid(L, 2001)
    source = _random_source(grid, seed)
    greens = resolve_elliptic(omega, source, L, A)
    direct = solve_direct_bvp(omega, source, L, A)
    assert greens[0] == 0 and direct[0] == 0
    assert np.max(np.abs(greens - direct)) <= 1e-6 * max(1.0, np.max(np.abs(direct)))


def test_dense_matrix_reproduces_banded_solve():
    grid = RadialGrid(L, 101)
    omega = 0.7 - 0.2j
    source = SourceData(grid, grid.nodes * (1.0 - grid.nodes) + 0j, B=0.0)
    psi = solve_direct_bvp(omega, source, L, A)
    np.testing.assert_allclose(bvp_matrix(omega, grid, A) @ psi[1:], source.F[1:], atol=1e-9)


def test_resolve_rejects_mismatched_radius():
    source = SourceData(RadialGrid(2.0, 11), np.zeros(11))
    with pytest.raises(ValueError):
        resolve_elliptic(0.5, source, L, A)


def test_compatibility_of_a_polynomial_solution(poles_ref):
    # psi = r^3 solves the IVP with F = 6r + (1 + w^2) r^3
    pole = poles_ref[0]
    omega = pole.omega
    grid = RadialGrid(L, 401)
    r = grid.nodes
    F = 6.0 * r + (1.0 + omega ** 2) * r ** 3
    source = SourceData(grid, F, B=0.25)
    target = pole_compatibility(pole, source, L, A)
    expected = (1j * L * omega - A) * L ** 3 + A * L * 3.0 * L ** 2
    assert target.l_value == pytest.approx(expected, rel=1e-8)
    assert target.r_target == pytest.approx(expected / L ** 2 - 0.25, rel=1e-8)


def _static_history(grid: RadialGrid, dt: float, t_end: float):
    psi = np.sin(np.pi * grid.nodes / (2.0 * grid.L))
    steps = int(round(t_end / dt))
    return [RadialState(grid=grid, psi=psi, psi_t=grid.zeros(), time=i * dt) for i in range(steps + 1)], psi


def test_static_trajectory_moments():
    grid = RadialGrid(L, 21)
    dt = 1e-3
    history, psi = _static_history(grid, dt, 2.0)
    zero, moving = fourier_sources(history, [0.0, 0.7], dt)
    # with a time-independent state the cutoff terms integrate by parts to i w J psi
    assert np.max(np.abs(zero.F)) < 1e-8
    assert zero.B == pytest.approx(psi[-1] / L, abs=1e-8)
    J = moving.B * L / psi[-1]
    np.testing.assert_allclose(moving.F, -0.7j * J * psi, atol=1e-8)


def test_single_frequency_form_infers_dt():
    grid = RadialGrid(L, 21)
    history, _ = _static_history(grid, 1e-3, 2.0)
    source = fourier_source(history, STANDARD_CUTOFF, 0.0)
    assert source.B == pytest.approx(1.0 / L, abs=1e-8)


def test_short_history_rejected():
    grid = RadialGrid(L, 21)
    history, _ = _static_history(grid, 1e-3, 1.5)
    with pytest.raises(InsufficientHistoryError):
        fourier_sources(history, [0.5], 1e-3)
    with pytest.raises(InsufficientHistoryError):
        fourier_sources([], [0.5], 1e-3)


def test_non_uniform_history_rejected():
    grid = RadialGrid(L, 21)
    accumulator = FourierAccumulator(grid, [0.5], dt=1e-3)
    accumulator.observe(RadialState.zero(grid, time=0.0))
    with pytest.raises(InsufficientHistoryError):
        accumulator.observe(RadialState.zero(grid, time=0.5))


def _l2(values: np.ndarray, grid: RadialGrid) -> float:
    return float(np.sqrt(trapezoid(np.abs(values) ** 2, dx=grid.dr)))


resolvent_points = st.tuples(
    st.floats(min_value=0.5, max_value=6.0),
    st.booleans(),
    st.floats(min_value=-2.0, max_value=-0.5),
    st.integers(min_value=0, max_value=10_000),
)


@given(resolvent_points)
@settings(max_examples=30, deadline=None)
def test_direct_solve_obeys_the_resolvent_bound(point):
    alpha, negative, beta, seed = point
    alpha = -alpha if negative else alpha
    grid = RadialGrid(L, 401)
    forced = _random_source(grid, seed)
    source = SourceData(grid, forced.F, B=0.0)
    psi = solve_direct_bvp(complex(alpha, beta), source, L, A)
    u_sq, h_sq = _l2(psi, grid) ** 2, _l2(source.F, grid) ** 2
    # imaginary part of the energy identity: 2|alpha beta| ||U|| <= ||H||
    assert u_sq <= h_sq / (4.0 * (alpha * beta) ** 2) * (1.0 + 1e-9)
    assert u_sq <= h_sq / abs(alpha * beta) * (1.0 + 1e-9)


def test_solution_blows_up_like_the_inverse_distance_to_a_pole():
    pole = -1j * find_imaginary_poles(L, A)[0]
    grid = RadialGrid(L, 801)
    source = SourceData(grid, _random_source(grid, 7).F, B=0.0)
    direction = np.exp(0.3j)
    distances = np.logspace(-2, -5, 7)
    norms = [_l2(resolve_elliptic(pole + d * direction, source, L, A), grid) for d in distances]
    slope = np.polyfit(np.log(distances), np.log(norms), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


def test_smallest_singular_value_vanishes_only_at_a_pole():
    pole = -1j * find_imaginary_poles(L, A)[0]
    regular = 1.5 - 0.5j
    at_pole, off_pole = [], []
    for n in (51, 101, 201):
        grid = RadialGrid(L, n)
        at_pole.append(svdvals(bvp_matrix(pole, grid, A))[-1])
        off_pole.append(svdvals(bvp_matrix(regular, grid, A))[-1])
    assert at_pole[0] > 4.0 * at_pole[-1]
    assert at_pole[-1] < 1e-2 * off_pole[-1]
    assert min(off_pole) > 0.5
