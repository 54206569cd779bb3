import math

import pytest
from hypothesis import given, strategies as st

from conecrit.errors import PreconditionError
from conecrit.geometry import AngularDomain, ConeSection, contains, inner_domain, shrink


def test_constructors_and_boundary_flags():
    assert not AngularDomain.full(3).has_boundary
    cap = AngularDomain.cap(3, math.pi / 3)
    assert cap.right_dirichlet and not cap.left_dirichlet
    band = AngularDomain.band(4, 0.2, 1.0)
    assert band.left_dirichlet and band.right_dirichlet


@pytest.mark.parametrize("args", [(3, -0.1), (3, 0.0), (3, 4.0), (2, 1.0)])
def test_cap_rejects_bad_input(args):
    with pytest.raises(PreconditionError):
        AngularDomain.cap(*args)


def test_band_rejects_reversed_angles():
    with pytest.raises(PreconditionError):
        AngularDomain.band(3, 1.0, 0.5)


def test_contains_and_shrink():
    cap = AngularDomain.cap(3, 1.0)
    assert contains(cap, 0.5) and not contains(cap, 1.2)
    small = shrink(cap, 0.25)
    assert small.theta1 == pytest.approx(0.75)
    assert cap.compactly_contains(small)
    assert not cap.compactly_contains(cap)


def test_inner_domain_of_sphere_is_a_cap():
    d = inner_domain(AngularDomain.full(3))
    assert d.kind == "cap" and d.theta1 < math.pi


def test_json_round_trip():
    band = AngularDomain.band(5, 0.3, 1.1)
    assert AngularDomain.from_json(band.to_json()) == band


def test_cone_section_requires_order():
    with pytest.raises(PreconditionError):
        ConeSection(AngularDomain.cap(3, 1.0), 2.0, 1.0)


@given(st.floats(0.2, 3.0), st.floats(0.01, 0.45))
def test_inner_domain_is_compactly_contained(theta1, frac):
    cap = AngularDomain.cap(3, theta1)
    assert cap.compactly_contains(inner_domain(cap, frac))
