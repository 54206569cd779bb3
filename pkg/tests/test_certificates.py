import json
import math

import numpy as np
import pytest

from conecrit import certificates as cert
from conecrit.cone import RadialAngular, build_cone_mesh
from conecrit.errors import GapFailure, PreconditionError, SearchExhausted
from conecrit.exponents import characteristic_roots, supersolution_amplitude
from conecrit.geometry import AngularDomain
from conecrit.radial import Constant


@pytest.fixture(scope="module")
def hemi_lambda():
    return cert.effective_lambda(AngularDomain.cap(3, math.pi / 2))


@pytest.mark.parametrize("p", [2.05, 2.5, 3.0, 4.0])
def test_strong_supersolution_above_critical(hemisphere, hemi_lambda, p):
    c = 0.5 * supersolution_amplitude(p, hemi_lambda[0], 3, 1.0)
    res = cert.verify_supersolution_strong(hemisphere, 3, p, c)
    assert res.passed and res.strong_margin > 0


@pytest.mark.parametrize("p", [1.5, 2.0])
@pytest.mark.parametrize("c", [1e-6, 1e-2, 1.0, 10.0])
def test_strong_supersolution_fails_at_or_below_critical(hemisphere, p, c):
    assert not cert.verify_supersolution_strong(hemisphere, 3, p, c).passed


def test_conservative_lambda_is_below_estimate(hemi_lambda):
    lam, est = hemi_lambda
    assert lam < est.value and est.value - lam == pytest.approx(est.error)


@pytest.mark.parametrize("p, bound", [(1.1, 8), (1.5, 32), (1.9, 2**30)])
def test_nonexistence_search(hemisphere, p, bound):
    res = cert.nonexistence_certificate(hemisphere, 3, p, -2.0)
    assert res.passed and res.R_star <= bound and res.mu > res.Lambda1


def test_nonexistence_R_star_grows_as_c_shrinks(hemisphere):
    a = cert.nonexistence_certificate(hemisphere, 3, 1.5, -2.0, c=1.0)
    b = cert.nonexistence_certificate(hemisphere, 3, 1.5, -2.0, c=1e-6)
    assert b.R_star > a.R_star


def test_nonexistence_rejects_supercritical_input(hemisphere):
    with pytest.raises(PreconditionError):
        cert.nonexistence_certificate(hemisphere, 3, 2.5, -2.0)


def test_nonexistence_search_exhausts(hemisphere):
    with pytest.raises(SearchExhausted):
        cert.nonexistence_certificate(hemisphere, 3, 1.9, -2.0, c=1e-30, max_exp=10)


@pytest.mark.parametrize("domain", [AngularDomain.cap(3, math.pi / 2), AngularDomain.full(3)])
def test_critical_case_passes(domain):
    res = cert.critical_case_certificate(domain, 3)
    assert res.passed and res.gap > 0 and res.alpha_tilde > res.alpha_minus


def test_critical_case_narrow_cap_needs_larger_eps():
    # default eps = 0.5 leaves a gap of about 0.04 on Cap{pi/4}; R* lies far beyond 2^60
    narrow = AngularDomain.cap(3, math.pi / 4)
    with pytest.raises(SearchExhausted):
        cert.critical_case_certificate(narrow, 3)
    res = cert.critical_case_certificate(narrow, 3, eps=4.0)
    assert res.passed and res.search.R_star <= 2**20


def test_critical_case_with_zero_eps_fails(hemisphere):
    res = cert.critical_case_certificate(hemisphere, 3, eps=0.0)
    assert not res.passed and res.gap == 0.0


def test_critical_gap_failure_is_reported(hemisphere, monkeypatch):
    real = cert.extrapolated_principal
    # a perturbation that fails to lower the eigenvalue must raise, not pass silently
    monkeypatch.setattr(cert, "extrapolated_principal", lambda d, n=2000, V=None: real(d, n))
    with pytest.raises(GapFailure):
        cert.critical_case_certificate(hemisphere, 3, eps=0.3)


def test_weak_check_and_power_lift(hemisphere, hemi_lambda):
    mesh = build_cone_mesh(hemisphere, 10 / 9, 10, hs=math.log(3) / 32)
    c = 0.5 * supersolution_amplitude(3.0, hemi_lambda[0], 3, 1.0)
    fld = cert.power_candidate(mesh, 3.0, c)
    assert cert.verify_supersolution_weak(fld, 3.0, trials=30).passed
    for p in (3.5, 4.0, 6.0):
        assert cert.verify_supersolution_weak(cert.power_lift(fld, 3.0, p), p, trials=30).passed


def test_weak_check_rejects_constant_at_critical(hemisphere):
    mesh = build_cone_mesh(hemisphere, 10 / 9, 10, hs=math.log(3) / 32)
    from conecrit.cone import DiscreteField
    one = DiscreteField(mesh, np.ones(mesh.K.shape[0]), np.ones(mesh.KB.shape[1]))
    assert not cert.verify_supersolution_weak(one, 2.0, trials=50).passed


def test_weak_check_zero_trials_is_flagged(hemisphere):
    mesh = build_cone_mesh(hemisphere, 1.0, 3.0, n_theta=16, per_decade=10)
    fld = cert.power_candidate(mesh, 3.0, 1.0)
    res = cert.verify_supersolution_weak(fld, 3.0, trials=0)
    assert "no-trials" in res.flags


def test_power_lift_identity_and_order():
    mesh = build_cone_mesh(AngularDomain.cap(3, 1.0), 1.0, 3.0, n_theta=16, per_decade=10)
    fld = cert.power_candidate(mesh, 3.0, 1.0)
    same = cert.power_lift(fld, 3.0, 3.0)
    np.testing.assert_array_equal(same.interior, fld.interior)
    with pytest.raises(PreconditionError):
        cert.power_lift(fld, 3.0, 2.0)


def test_ld_constant_supersolution(hemisphere):
    alpha = -4.0
    coeff = Constant(alpha, 3)
    mat = RadialAngular(coeff, 2.0)
    c = 0.5 * supersolution_amplitude(1.6, coeff.value, 3, 1.0)
    assert cert.verify_supersolution_strong(hemisphere, 3, 1.6, c, matrix=mat).passed


def test_gb_norm_linear_and_tail():
    a, b = cert.gb_norm_estimate(1.0), cert.gb_norm_estimate(3.0)
    assert b.estimate == pytest.approx(3 * a.estimate, rel=1e-12)
    assert a.norm_at(a.epsilon_star) == pytest.approx(0.99)
    # the analytic tail beyond |y| = 1e8 is a few percent of the total
    assert 0.03 < a.tail_fraction < 0.05


def test_gb_norm_dimension_scaling():
    assert cert.gb_norm_estimate(1.0, 5).estimate == pytest.approx(
        cert.gb_norm_estimate(1.0, 3).estimate / 3, rel=1e-12)


def test_certificates_serialize(hemisphere):
    res = cert.nonexistence_certificate(hemisphere, 3, 1.5, -2.0)
    js = json.dumps(res.to_json(), sort_keys=True)
    assert json.loads(js)["verdict"] == "pass"
