import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conecrit.errors import PreconditionError
from conecrit.geometry import AngularDomain, inner_domain
from conecrit.minimal import (build_series, cross_gradient, evaluate, fundamental_upper_check,
                              gradient_norm_check, lower_bound_check, remainder_ratio,
                              tail_bound_check)
from conecrit.spectral import assemble, default_bump, eigen_basis


@pytest.fixture(scope="module")
def series(hemisphere, hemi_decomp):
    return build_series(hemi_decomp, default_bump(hemisphere)(hemi_decomp.mesh.theta), 8)


def test_hemisphere_exponents_are_odd_modes(series):
    np.testing.assert_allclose(series.alphas[:3], [-2.0, -4.0, -6.0], atol=1e-4)


def test_series_matches_psi_at_unit_radius(series, hemi_decomp):
    v = evaluate(series, 1.0, hemi_decomp.mesh.theta)
    psi = series.psi
    assert np.sqrt(np.sum(hemi_decomp.mesh.mass * (v - psi) ** 2)) <= series.truncation_residual + 1e-12


def test_series_is_harmonic_along_rays(series):
    # r^alpha_k phi_k is harmonic, so r^(N-2) times the radial derivative of each
    # projected mode is a scaled copy; check the radial ODE by finite differences
    theta = np.array([0.3])
    r = np.array([3.0])
    h = 1e-3
    f = lambda rr: evaluate(series, rr, theta)
    d2 = (f(r + h) - 2 * f(r) + f(r - h)) / h**2
    d1 = (f(r + h) - f(r - h)) / (2 * h)
    proj = sum(series.coefficients[k] * series.alphas[k] * (series.alphas[k] + 1)
               * r ** (series.alphas[k] - 2) * series.phi_values(theta)[k] for k in range(series.K))
    assert d2 + 2 * d1 / r == pytest.approx(proj, rel=1e-5)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_gradient_norm_equals_abs_alpha(series, k):
    val, target = gradient_norm_check(series, k)
    assert val == pytest.approx(target, rel=5e-3)


def test_cross_gradients_vanish(series):
    worst = max(abs(cross_gradient(series, k, m)) for k in range(1, 9) for m in range(k + 1, 9))
    assert worst <= 1e-8


def test_lower_bound_stabilizes(series, hemisphere):
    lb = lower_bound_check(series, inner_domain(hemisphere), 2.0)
    assert lb.passed and lb.c > 0


def test_tail_bound_is_stable(series, hemisphere):
    # the third mode is still a quarter of the second at rho = 2; test further out
    assert tail_bound_check(series, inner_domain(hemisphere), 10.0).passed


def test_remainder_ratio_decreases(series, hemisphere):
    ratios = remainder_ratio(series, inner_domain(hemisphere), [2.0, 4.0, 8.0, 16.0, 32.0])
    assert np.all(np.diff(ratios) < 0)


@pytest.mark.parametrize("domain", [AngularDomain.cap(3, math.pi / 2), AngularDomain.full(3)])
def test_fundamental_upper_bound(domain):
    dec = eigen_basis(assemble(domain, 400), 6)
    s = build_series(dec, default_bump(domain)(dec.mesh.theta), 6)
    assert fundamental_upper_check(s).passed


def test_rejects_negative_psi(hemi_decomp):
    psi = -np.ones(hemi_decomp.mesh.n)
    with pytest.raises(PreconditionError):
        build_series(hemi_decomp, psi)


def test_evaluate_rejects_small_radius(series):
    with pytest.raises(PreconditionError):
        evaluate(series, 0.5, 0.1)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 0.4))
def test_series_positive_inside(width):
    dom = AngularDomain.cap(3, 1.2)
    dec = eigen_basis(assemble(dom, 400), 8)
    s = build_series(dec, default_bump(dom, width)(dec.mesh.theta), 8)
    theta = dec.mesh.theta[dec.mesh.theta < 0.8]
    assert np.all(evaluate(s, 5.0, theta) > 0)
