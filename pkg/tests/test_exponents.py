import math

import pytest
from hypothesis import given, strategies as st

from conecrit.errors import PreconditionError, SpectralFloorError, SubcriticalError
from conecrit.exponents import (alpha_for_exponent, characteristic_roots, critical_exponent,
                                critical_exponent_from_alpha, exponent_gap, hardy_floor,
                                supersolution_amplitude)


@pytest.mark.parametrize("lam, N, am, ap", [(2.0, 3, -2.0, 1.0), (0.0, 3, -1.0, 0.0),
                                            (0.0, 5, -3.0, 0.0), (12.0, 3, -4.0, 3.0)])
def test_known_roots(lam, N, am, ap):
    r = characteristic_roots(lam, N)
    assert (r.alpha_minus, r.alpha_plus) == (am, ap)
    assert math.copysign(1.0, r.alpha_plus) > 0


@pytest.mark.parametrize("N", [3, 4, 5, 10])
def test_full_space_exponent(N):
    assert critical_exponent(characteristic_roots(0.0, N)).p_star == pytest.approx(N / (N - 2), rel=1e-15)


def test_floor_is_rejected():
    with pytest.raises(SpectralFloorError):
        characteristic_roots(hardy_floor(3), 3)
    with pytest.raises(PreconditionError):
        characteristic_roots(1.0, 2)


def test_alpha_for_exponent_inverts_critical_exponent():
    for p in (1.2, 2.0, 3.5):
        assert critical_exponent_from_alpha(alpha_for_exponent(p)) == pytest.approx(p, rel=1e-15)


def test_gap_sign_brackets_critical_exponent():
    assert exponent_gap(2.0, 3, 2.0) == pytest.approx(0.0, abs=1e-14)
    assert exponent_gap(2.0, 3, 2.5) > 0 > exponent_gap(2.0, 3, 1.5)


def test_amplitude_requires_supercritical_p():
    with pytest.raises(SubcriticalError):
        supersolution_amplitude(1.5, 2.0, 3, 1.0)
    c = supersolution_amplitude(3.0, 2.0, 3, 1.0)
    # hemisphere, p = 3: beta = -1, gap = 2 - (-1)(0) = 2, c^2 = 2
    assert c == pytest.approx(math.sqrt(2.0))


@given(st.integers(3, 12), st.floats(-0.24, 1e4))
def test_roots_solve_the_quadratic(N, s):
    lam = hardy_floor(N) + 0.001 + s + 0.25
    r = characteristic_roots(lam, N)
    f_m, f_p = r.residuals()
    scale = max(1.0, abs(lam))
    assert abs(f_m) <= 1e-12 * scale and abs(f_p) <= 1e-10 * scale
    assert r.alpha_minus <= -(N - 2) / 2 <= r.alpha_plus


@given(st.integers(3, 8), st.floats(0.0, 100.0), st.floats(0.01, 50.0))
def test_p_star_decreases_with_lambda(N, lam, dl):
    p1 = critical_exponent_from_alpha(characteristic_roots(lam, N).alpha_minus)
    p2 = critical_exponent_from_alpha(characteristic_roots(lam + dl, N).alpha_minus)
    assert 1 < p2 < p1 <= N / (N - 2) + 1e-12
