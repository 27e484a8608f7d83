import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solvers.spectral import (
    AP_BOTTOM,
    PoleKind,
    asymptotic_line,
    asymptotic_pole,
    bracket_root,
    characteristic_value,
    classify_instability_case,
    count_zeros,
    entire_characteristic,
    eta_expansion,
    find_imaginary_poles,
    find_poles_in_strip,
    refine_pole,
)
from utils.errors import AtPoleError, DegenerateLError, PoleOnLineError

INSTABILITY_CASES = [(1.0, 0.5, 1), (2.0, 0.9, 2), (0.8, 0.3, 3), (0.5, 0.5, 4), (0.3, 0.6, 5)]

frequencies = st.builds(
    complex,
    st.floats(min_value=-10.0, max_value=10.0),
    st.floats(min_value=-1.0, max_value=1.0),
)


def test_asymptotic_line_value():
    assert asymptotic_line(1.0, 0.5) == pytest.approx(math.log(3.0) / 2.0)


@pytest.mark.parametrize("L, a", [(0.0, 0.5), (1.0, 0.0), (1.0, 1.0), (-2.0, 0.5)])
def test_invalid_parameters_rejected(L, a):
    with pytest.raises(ValueError):
        asymptotic_line(L, a)


def test_bracket_root_ties_and_values():
    assert bracket_root(1j) == 0
    assert bracket_root(3.0) == pytest.approx(math.sqrt(10.0))
    assert bracket_root(-0.5j).real > 0


@given(frequencies)
def test_bracket_root_is_the_closer_root(omega):
    z = bracket_root(omega)
    assert abs(z * z - (omega * omega + 1.0)) <= 1e-9 * (1.0 + abs(omega) ** 2)
    assert abs(z - omega) <= abs(z + omega) + 1e-12


@given(frequencies)
@settings(max_examples=50, deadline=None)
def test_entire_characteristic_factors_d(omega):
    L, a = 1.0, 0.5
    z = bracket_root(omega)
    expected = 2j * z * cmath.exp(1j * z * L) * entire_characteristic(omega, L, a)
    assert characteristic_value(omega, L, a) == pytest.approx(expected, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("L, a, case", INSTABILITY_CASES)
def test_classification_of_instability_cases(L, a, case):
    assert classify_instability_case(L, a) == case


@pytest.mark.parametrize("L, a, case", INSTABILITY_CASES)
def test_every_case_has_an_unstable_pole(L, a, case):
    roots = find_imaginary_poles(L, a)
    assert any(0.0 < s < 1.0 for s in roots)
    for s in roots:
        assert abs(characteristic_value(-1j * s, L, a)) < 1e-10


def test_imaginary_pole_at_reference_parameters():
    roots = find_imaginary_poles(1.0, 0.5)
    assert len(roots) == 1
    assert 0.0 < roots[0] < 0.5


def test_degenerate_radius_raises():
    with pytest.raises(DegenerateLError) as info:
        find_imaginary_poles(4.493409457909064, 0.5)
    assert info.value.code == "spectral.degenerate_l"


def test_strip_poles_are_closed_under_mirroring(poles_ref, beta_ref):
    omegas = [p.omega for p in poles_ref]
    for pole in poles_ref:
        assert pole.omega.imag < beta_ref
        assert pole.char_residual < 1e-10
        assert any(abs(pole.mirror().omega - other) < 1e-8 for other in omegas)


def test_strip_contains_the_unstable_pole(poles_ref):
    s = max(find_imaginary_poles(1.0, 0.5))
    matches = [p for p in poles_ref if abs(p.omega - (-1j * s)) < 1e-8]
    assert len(matches) == 1
    assert matches[0].kind is PoleKind.PURELY_IMAGINARY
    assert matches[0].is_imaginary


def test_strip_is_sorted_by_imaginary_part(poles_ref):
    imags = [p.omega.imag for p in poles_ref]
    assert imags == sorted(imags)


def test_count_matches_strip_search(beta_ref):
    alpha_max = 20.0
    poles = find_poles_in_strip(1.0, 0.5, beta_ref, alpha_max)
    assert count_zeros(1.0, 0.5, (-alpha_max, alpha_max, AP_BOTTOM, beta_ref)) == len(poles)


def test_pole_on_line_raises():
    s = find_imaginary_poles(1.0, 0.5)[0]
    with pytest.raises(PoleOnLineError):
        find_poles_in_strip(1.0, 0.5, -s, 20.0)


def test_nonpositive_cutoff_rejected():
    with pytest.raises(ValueError):
        find_poles_in_strip(1.0, 0.5, 0.2, 0.0)


def test_high_poles_approach_the_lattice():
    L, a = math.pi, 0.5
    beta_inf = math.log(3.0) / (2.0 * math.pi)
    ks = np.arange(10, 101, 10)
    gaps = []
    for k in ks:
        pole = refine_pole(asymptotic_pole(int(k), L, a), L, a)
        gap = abs(pole.omega - (k * math.pi / L + 1j * beta_inf))
        assert gap * k < 1.0
        gaps.append(gap)
    slope = np.polyfit(np.log(ks), np.log(gaps), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.2)


def test_eta_expansion_fields():
    exp = eta_expansion(500 + 0.1j, 1.0, 0.5)
    assert exp.c0 == pytest.approx(3.0)
    assert exp.d0 == pytest.approx(math.exp(0.2) / 3.0)
    assert exp.d0 < 1.0
    assert abs(exp.eta - exp.approximation(1)) < 1e-5
    assert abs(exp.eta - exp.approximation(1)) < abs(exp.eta - exp.approximation(0))


def test_eta_vanishes_at_a_pole():
    s = find_imaginary_poles(1.0, 0.5)[0]
    with pytest.raises(AtPoleError):
        eta_expansion(-1j * s, 1.0, 0.5)


@given(frequencies)
@settings(max_examples=100, deadline=None)
def test_characteristic_modulus_is_mirror_symmetric(omega):
    value = characteristic_value(omega, 1.0, 0.5)
    mirrored = characteristic_value(-omega.conjugate(), 1.0, 0.5)
    assert abs(mirrored) == pytest.approx(abs(value), rel=1e-9, abs=1e-12)


def test_no_poles_on_the_real_axis():
    assert abs(entire_characteristic(5.0, 1.0, 0.5)) > 0.0
    alphas = np.linspace(-30.0, 30.0, 6001)
    assert np.min(np.abs(entire_characteristic(alphas, 1.0, 0.5))) > 0.1


@pytest.mark.parametrize("L, a, case", INSTABILITY_CASES)
def test_imaginary_roots_zero_the_entire_form(L, a, case):
    for s in find_imaginary_poles(L, a):
        assert abs(entire_characteristic(-1j * s, L, a)) < 1e-9


def test_eta_leading_coefficient_on_the_real_axis():
    exp = eta_expansion(500.0 + 0j, 1.0, 0.5)
    assert exp.d0 == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_cell_counts_match_found_poles(poles_ref, beta_ref):
    edges = [(k + 0.5) * math.pi for k in range(-5, 5)]
    for x0, x1 in zip(edges[:-1], edges[1:]):
        inside = [p for p in poles_ref if x0 < p.omega.real < x1]
        assert count_zeros(1.0, 0.5, (x0, x1, AP_BOTTOM, beta_ref)) == len(inside)
