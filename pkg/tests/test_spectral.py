import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigh

from conecrit.errors import PreconditionError
from conecrit.geometry import AngularDomain
from conecrit.spectral import (AngularPotential, assemble, default_bump, eigen_basis,
                               extrapolated_principal, orbit_area, principal_eigenpair, project,
                               sphere_area)

# Values from an independent shooting solve of the Legendre equation
# (solve_ivp + brentq), cross-checked with P_nu(cos theta1) = 0.
SHOOTING = {
    (3, math.pi / 3): 4.93604186540624,
    (3, math.pi / 4): 9.039689488665372,
    (4, math.pi / 2): 3.0,
}


@pytest.mark.parametrize("key", sorted(SHOOTING))
def test_principal_eigenvalue_matches_shooting(key):
    N, theta1 = key
    est = extrapolated_principal(AngularDomain.cap(N, theta1))
    assert est.value == pytest.approx(SHOOTING[key], abs=1e-6)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_full_sphere_axisymmetric_spectrum(N):
    lams = eigen_basis(assemble(AngularDomain.full(N), 800), 4).lambdas
    expected = [l * (l + N - 2) for l in range(4)]
    assert abs(lams[0]) < 1e-12
    np.testing.assert_allclose(lams[1:], expected[1:], rtol=5e-5)


def test_hemisphere_spectrum_is_odd_legendre_modes():
    lams = eigen_basis(assemble(AngularDomain.cap(3, math.pi / 2), 800), 3).lambdas
    np.testing.assert_allclose(lams, [2, 12, 30], rtol=5e-5)


@pytest.mark.parametrize("domain", [AngularDomain.cap(3, 1.1), AngularDomain.band(3, 0.4, 2.0),
                                    AngularDomain.full(4)])
def test_inverse_iteration_matches_dense_eigh(domain):
    op = assemble(domain, 200)
    f = op.form
    A = np.diag(f.diag) + np.diag(f.off, 1) + np.diag(f.off, -1)
    dense = eigh(A, np.diag(f.m), eigvals_only=True)[:5]
    np.testing.assert_allclose(eigen_basis(op, 5).lambdas, dense, rtol=1e-10, atol=1e-10)


def test_eigenfunctions_orthonormal(hemi_decomp):
    m = hemi_decomp.mesh.mass
    G = hemi_decomp.phis @ (m * hemi_decomp.phis).T
    np.testing.assert_allclose(G, np.eye(hemi_decomp.K), atol=1e-12)


def test_principal_eigenfunction_is_positive():
    lam, phi = principal_eigenpair(assemble(AngularDomain.band(3, 0.5, 1.5), 300))
    assert lam > 0 and np.all(phi > 0)


def test_areas():
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert orbit_area(3) == pytest.approx(2 * math.pi)


def test_potential_lowers_eigenvalue():
    cap = AngularDomain.cap(3, math.pi / 2)
    plain = extrapolated_principal(cap, 500).value
    pert = extrapolated_principal(cap, 500, AngularPotential.indicator(0.5, AngularDomain.cap(3, 1.0)))
    assert pert.value < plain


def test_projection_rejects_boundary_mass(hemi_decomp):
    psi = np.ones(hemi_decomp.mesh.n)
    with pytest.raises(PreconditionError):
        project(hemi_decomp, psi)


def test_projection_reconstructs_smooth_bump(hemisphere, hemi_decomp):
    psi = default_bump(hemisphere)(hemi_decomp.mesh.theta)
    pr = project(hemi_decomp, psi)
    assert pr.residual_norm < pr.psi_norm


def test_eigen_basis_guard():
    with pytest.raises(PreconditionError):
        eigen_basis(assemble(AngularDomain.cap(3, 1.0), 40), 20)


def test_operator_is_m_matrix():
    assert assemble(AngularDomain.band(4, 0.3, 2.5), 100).is_m_matrix()


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 2.9), st.floats(0.05, 0.25))
def test_eigenvalue_decreases_with_cap_angle(theta1, dtheta):
    small = extrapolated_principal(AngularDomain.cap(3, theta1), 400).value
    large = extrapolated_principal(AngularDomain.cap(3, min(theta1 + dtheta, 3.1)), 400).value
    assert large < small


@settings(max_examples=10, deadline=None)
@given(st.integers(3, 7), st.floats(0.3, 3.0))
def test_richardson_error_is_small(N, theta1):
    est = extrapolated_principal(AngularDomain.cap(N, theta1), 400)
    assert est.error < 1e-3 * est.value
