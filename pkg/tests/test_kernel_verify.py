import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solvers.kernel_verify import (
    H1_INTEGRALS,
    KernelProbe,
    check_eta_order,
    check_gamma_expansion,
    check_h1_integrals,
    hilbert_norm_ratio,
    hilbert_truncated,
    kernel_h,
    kernel_k,
    kernel_k_derivative,
    kernel_Q,
    kernel_Q_derivative,
    run_verification_suite,
)

L, A = 1.0, 0.5
C0 = 2.25

log_magnitudes = st.floats(min_value=-13.0, max_value=7.0)
signs = st.sampled_from([-1.0, 1.0])


@given(log_magnitudes, signs)
@settings(max_examples=200, deadline=None)
def test_kernel_bounds_with_frozen_constant(log_p, sign):
    p = sign * math.exp(log_p)
    assert abs(kernel_k(p)) <= C0
    assert abs(kernel_k_derivative(p)) <= C0
    assert abs(kernel_h(p)) <= max(C0, abs(math.log(abs(p))))


def test_probe_constant_below_frozen_value():
    probe = KernelProbe.build()
    assert 2.0 < probe.c0 < C0
    assert all(probe.check_bounds(np.array([-3.0, -0.01, 0.2, 40.0]), c0=C0, slack=0.0).values())


def test_kernel_k_values_and_limits():
    assert kernel_k(0.0) == 0.0
    assert kernel_k(1e-9) == pytest.approx(0.5 * math.pi, abs=1e-8)
    assert kernel_k(-1e-9) == pytest.approx(-0.5 * math.pi, abs=1e-8)
    assert abs(kernel_k(1e6)) < 1e-5
    assert kernel_k_derivative(0.0) == -1.0


def test_kernel_h_imaginary_part_is_k():
    p = np.array([-2.0, -0.3, 0.3, 2.0])
    np.testing.assert_allclose(np.imag(kernel_h(p)), kernel_k(p))


def test_kernel_h_diverges_at_zero():
    with pytest.raises(ValueError):
        kernel_h(0.0)


def test_cutoff_below_one_rejected():
    with pytest.raises(ValueError):
        kernel_k(1.0, A=0.5)


def test_q_derivative_is_minus_two_k():
    p = np.array([-3.1, -0.7, 0.4, 1.3, 6.2])
    delta = 1e-5
    quotient = (kernel_Q(p + delta) - kernel_Q(p - delta)) / (2.0 * delta)
    np.testing.assert_allclose(quotient, kernel_Q_derivative(p), atol=1e-6)
    np.testing.assert_allclose(kernel_Q_derivative(p), -2.0 * kernel_k(p))


def test_q_at_zero():
    assert kernel_Q(0.0) == pytest.approx(2.0)


def test_hilbert_of_linear_profile():
    s = np.linspace(0.0, L, 101)
    t = L + 0.5
    x = t + s
    oracle = x * np.log(np.abs(x / (x - L))) - L
    np.testing.assert_allclose(hilbert_truncated(s, t, L), oracle, atol=1e-9)


def test_hilbert_of_zero_is_zero():
    assert not np.any(hilbert_truncated(np.zeros(51), 0.3, L))


def test_hilbert_needs_two_samples():
    with pytest.raises(ValueError):
        hilbert_truncated(np.ones(1), 0.0, L)


@pytest.mark.parametrize("seed", range(5))
def test_hilbert_norm_ratio_bounded_by_pi(seed):
    rng = np.random.default_rng(seed)
    s = np.linspace(0.0, L, 401)
    f = sum(c * np.sin((k + 1) * np.pi * s / L) for k, c in enumerate(rng.normal(size=5)))
    assert hilbert_norm_ratio(f, float(rng.uniform(-L, L)), L) <= math.pi + 0.05


def test_eta_order_fits():
    beta = 0.1
    first = check_eta_order(L, A, beta, order=1)
    zeroth = check_eta_order(L, A, beta, order=0)
    assert first.passed, first
    assert zeroth.passed, zeroth
    assert first.expected == 2.0 and zeroth.expected == 1.0


def test_expansion_checks_reject_beta_above_line():
    with pytest.raises(ValueError):
        check_eta_order(L, A, 0.6)
    with pytest.raises(ValueError):
        check_eta_order(L, A, 0.1, alpha_range=(10.0, 5.0))


@pytest.mark.slow
def test_gamma_expansion_orders():
    report = check_gamma_expansion(L, A, 0.1, n_alpha=100)
    assert report.gamma.passed, report.gamma
    assert report.gamma_r.passed, report.gamma_r
    assert report.conjugate_error < 1e-10
    assert report.diagonal_error < 1e-12


def test_h1_integrals_stay_bounded():
    report = check_h1_integrals(L, A, 0.1, samples=20)
    assert report.all_passed, report.passed
    assert all(math.isfinite(v) for v in report.max_abs.values())


@pytest.mark.slow
def test_full_suite_passes():
    report = run_verification_suite(L, A, beta=0.1, hilbert_draws=20)
    failed = [check.name for check in report.checks if not check.passed]
    assert not failed
    document = report.to_dict()
    assert document["all_passed"] is True
    assert {"name", "value", "pass", "detail"} <= set(document["checks"][0])


def test_h1_table_covers_the_five_integrals():
    first_order = [row for row in H1_INTEGRALS if row[3] == 1]
    second_order = [row for row in H1_INTEGRALS if row[3] == 2]
    assert len(first_order) == 4
    assert len({row[1:] for row in first_order}) == 4
    # one 1/alpha^2 integral with e^{+-}(s): the two rows differ only in the sign of s
    assert len(second_order) == 2
    (_, r_a, s_a, _, branch_a), (_, r_b, s_b, _, branch_b) = second_order
    assert r_a == r_b == ("r", -1)
    assert branch_a == branch_b == "upper"
    assert {s_a, s_b} == {("s", 1), ("s", -1)}
    assert len(check_h1_integrals(1.0, 0.5, 0.2, samples=5).passed) == len(H1_INTEGRALS)
