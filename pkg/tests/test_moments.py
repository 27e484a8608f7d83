import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from solvers.greens import PoleTarget
from solvers.moments import (
    ControlBasis,
    ControlSignal,
    build_basis,
    build_moment_system,
    moment_matrix,
    representative_poles,
    row_count,
    synthesize_control,
    synthesize_from_targets,
)
from solvers.spectral import Frequency, Pole, PoleKind
from utils.errors import RankDeficientError, TargetMismatchError

targets_st = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


def _pole(omega: complex) -> Pole:
    kind = PoleKind.PURELY_IMAGINARY if omega.real == 0 else PoleKind.COMPLEX_PAIR_MEMBER
    return Pole(Frequency.from_omega(omega), kind, 0.0, 0)


def _paired_targets(values):
    """One imaginary pole and two complex pairs with conjugate-consistent targets."""
    s_target, re1, im1, re2, im2 = values
    first, second = _pole(2.7 + 0.1j), _pole(6.1 + 0.2j)
    return [
        PoleTarget(_pole(-0.3j), 0j, complex(s_target, 0.0)),
        PoleTarget(first, 0j, complex(re1, im1)),
        PoleTarget(first.mirror(), 0j, complex(re1, -im1)),
        PoleTarget(second, 0j, complex(re2, im2)),
        PoleTarget(second.mirror(), 0j, complex(re2, -im2)),
    ]


def test_basis_value_at_center():
    assert float(build_basis(1).evaluate(3.0)[0]) == pytest.approx(np.exp(-1.0))


def test_basis_size_validated():
    with pytest.raises(ValueError):
        ControlBasis(0)


def test_basis_vanishes_outside_support():
    values = build_basis(5).evaluate(np.array([0.0, 1.9, 2.0, 4.0, 4.5]))
    assert not np.any(values)


def test_basis_derivative_matches_difference_quotient():
    basis = build_basis(4)
    h = 1e-6
    for t in (2.4, 3.0, 3.7):
        quotient = (basis.evaluate(t + h) - basis.evaluate(t - h)) / (2 * h)
        np.testing.assert_allclose(basis.evaluate_derivative(t), quotient, rtol=1e-6, atol=1e-8)


def test_zero_frequency_moment_of_the_bump():
    control = ControlSignal(build_basis(1), np.array([1.0]))
    assert control.moment(0.0) == pytest.approx(0.443993816168, rel=1e-8)


def test_zero_control():
    control = ControlSignal.zero(3)
    assert control.is_zero
    assert control(3.0) == 0.0
    assert control.coefficient_l1 == 0.0


def test_coefficient_shape_checked():
    with pytest.raises(ValueError):
        ControlSignal(build_basis(3), np.zeros(2))


def test_control_frame():
    control = ControlSignal(build_basis(2), np.array([1.0, -0.5]))
    frame = control.to_frame(0.01)
    assert list(frame.columns) == ["t", "b", "b_prime"]
    assert frame["t"].iloc[-1] == pytest.approx(5.0)
    assert frame.loc[frame["t"] < 2.0, "b"].abs().max() == 0.0
    with pytest.raises(ValueError):
        control.to_frame(0.0)


def test_row_count_uses_one_row_per_imaginary_pole():
    poles = [t.pole for t in _paired_targets([0.0] * 5)]
    assert len(representative_poles(poles)) == 3
    assert row_count(poles) == 5


@given(st.tuples(targets_st, targets_st, targets_st, targets_st, targets_st))
@settings(max_examples=10, deadline=None)
def test_synthesized_control_reproduces_every_moment(values):
    targets = _paired_targets(values)
    control, system = synthesize_from_targets(targets)
    assert system.basis.size == system.n_rows + 4
    assert control.coefficients.dtype == np.float64
    for target in targets:
        assert abs(control.moment(target.pole.omega) - target.r_target) <= 1e-8 * max(1.0, abs(target.r_target))


def test_reference_pole_set_synthesis(poles_ref):
    rng = np.random.default_rng(0)
    targets = []
    for pole in representative_poles(poles_ref):
        if pole.is_imaginary:
            targets.append(PoleTarget(pole, 0j, complex(rng.normal(), 0.0)))
        else:
            value = complex(rng.normal(), rng.normal())
            targets.append(PoleTarget(pole, 0j, value))
            targets.append(PoleTarget(pole.mirror(), 0j, value.conjugate()))
    control, system = synthesize_from_targets(targets)
    assert system.coefficient_gain > 0.0
    for target in targets:
        assert abs(control.moment(target.pole.omega) - target.r_target) <= 1e-8 * max(1.0, abs(target.r_target))


def test_empty_target_set_gives_zero_control():
    system = build_moment_system([])
    control = synthesize_control(system)
    assert control.is_zero
    assert system.coefficient_gain == 0.0


def test_complex_target_at_imaginary_pole_rejected():
    with pytest.raises(TargetMismatchError):
        build_moment_system([PoleTarget(_pole(-0.3j), 0j, 1.0 + 0.5j)])


def test_non_conjugate_mirror_targets_rejected():
    targets = _paired_targets([1.0, 1.0, 1.0, 0.0, 0.0])
    targets[2] = PoleTarget(targets[2].pole, 0j, 1.0 + 1.0j)
    with pytest.raises(TargetMismatchError):
        build_moment_system(targets)


def test_basis_smaller_than_row_count_rejected():
    with pytest.raises(RankDeficientError):
        build_moment_system(_paired_targets([1.0] * 5), basis_size=3)


def test_moment_matrix_without_poles_is_empty():
    assert moment_matrix(build_basis(6), []).shape == (0, 6)


def test_moment_row_of_an_imaginary_pole():
    matrix = moment_matrix(build_basis(3), [_pole(0.4j)])
    assert matrix.shape == (1, 3)
    assert matrix[0, 0] > 0.0


def test_moment_matrix_matches_trapezoid_oracle():
    basis = build_basis(5)
    pole = _pole(2.7 + 0.1j)
    matrix = moment_matrix(basis, [pole, pole.mirror()])
    assert matrix.shape == (2, 5)
    t = np.linspace(2.0, 4.0, 200_001)
    values = basis.evaluate(t)
    growth = np.exp(0.1 * t)
    cos_rows = trapezoid(growth[:, None] * np.cos(2.7 * t)[:, None] * values, t, axis=0)
    sin_rows = trapezoid(growth[:, None] * np.sin(2.7 * t)[:, None] * values, t, axis=0)
    np.testing.assert_allclose(matrix[0], cos_rows, atol=1e-10)
    np.testing.assert_allclose(matrix[1], sin_rows, atol=1e-10)


def test_moment_matrix_with_too_few_columns_is_rank_deficient():
    poles = [t.pole for t in _paired_targets([0.0] * 5)]
    with pytest.raises(RankDeficientError):
        moment_matrix(build_basis(2), poles)


def test_single_imaginary_pole_closed_form():
    system = build_moment_system([PoleTarget(_pole(0.4j), 0j, 1.0 + 0j)], basis_size=1)
    control = synthesize_control(system)
    assert control.coefficients[0] == pytest.approx(1.0 / system.matrix[0, 0], rel=1e-10)


def test_synthesis_is_linear_in_the_targets():
    first_values = [0.4, 1.0, -0.5, 0.2, 0.3]
    second_values = [-1.1, 0.0, 0.8, -0.6, 1.5]
    mixed_values = [2.0 * x - 0.5 * y for x, y in zip(first_values, second_values)]

    def coefficients(values):
        return synthesize_from_targets(_paired_targets(values), basis_size=9)[0].coefficients

    expected = 2.0 * coefficients(first_values) - 0.5 * coefficients(second_values)
    np.testing.assert_allclose(coefficients(mixed_values), expected, rtol=1e-9,
                               atol=1e-9 * np.max(np.abs(expected)))
