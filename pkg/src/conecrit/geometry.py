"""Axisymmetric subdomains of the unit sphere and truncated cones over them.

Only domains invariant under rotations fixing the north pole are
represented: a polar cap ``{theta < theta1}``, a band
``{theta0 < theta < theta1}`` and the full sphere.  Membership depends on
the polar angle alone, so every angular problem reduces to one dimension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyDomainError, PreconditionError

PI = math.pi

KINDS = ("full", "cap", "band")


@dataclass(frozen=True)
class AngularDomain:
    """Axisymmetric open subdomain of S^{N-1}.

    ``theta0``/``theta1`` are the polar-angle bounds in radians.  For a cap
    ``theta0`` is 0, for the full sphere the bounds are ``(0, pi)``.  An end
    sitting on a pole (0 or pi) is not a Dirichlet boundary.
    """

    N: int
    kind: str
    theta0: float = 0.0
    theta1: float = PI

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise PreconditionError(f"dimension N must be an integer >= 3, got {self.N}")
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown domain kind {self.kind!r}")
        t0, t1 = float(self.theta0), float(self.theta1)
        if self.kind == "full":
            t0, t1 = 0.0, PI
        elif self.kind == "cap":
            if t0 != 0.0:
                raise PreconditionError("a cap starts at the pole: theta0 must be 0")
            if not 0.0 < t1 <= PI:
                raise PreconditionError(f"cap angle must lie in (0, pi], got {t1}")
        else:
            if not 0.0 <= t0 < t1 <= PI:
                raise PreconditionError(f"band needs 0 <= theta0 < theta1 <= pi, got {t0}, {t1}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "theta0", t0)
        object.__setattr__(self, "theta1", t1)

    # constructors -----------------------------------------------------
    @classmethod
    def full(cls, N: int) -> "AngularDomain":
        return cls(N, "full")

    @classmethod
    def cap(cls, N: int, theta1: float) -> "AngularDomain":
        return cls(N, "cap", 0.0, theta1)

    @classmethod
    def band(cls, N: int, theta0: float, theta1: float) -> "AngularDomain":
        return cls(N, "band", theta0, theta1)

    # boundary structure -----------------------------------------------
    @property
    def left_dirichlet(self) -> bool:
        return self.theta0 > 0.0

    @property
    def right_dirichlet(self) -> bool:
        return self.theta1 < PI

    @property
    def has_boundary(self) -> bool:
        return self.left_dirichlet or self.right_dirichlet

    @property
    def extent(self) -> float:
        return self.theta1 - self.theta0

    def contains(self, theta: float) -> bool:
        return contains(self, theta)

    def shrink(self, margin: float) -> "AngularDomain":
        return shrink(self, margin)

    def compactly_contains(self, other: "AngularDomain") -> bool:
        """True when the closure of ``other`` lies inside this (open) domain."""
        if other.N != self.N:
            return False
        lo_ok = other.theta0 > self.theta0 if self.left_dirichlet else True
        hi_ok = other.theta1 < self.theta1 if self.right_dirichlet else True
        return lo_ok and hi_ok

    def describe(self) -> str:
        if self.kind == "full":
            return f"full(N={self.N})"
        if self.kind == "cap":
            return f"cap(N={self.N}, theta1={self.theta1!r})"
        return f"band(N={self.N}, theta0={self.theta0!r}, theta1={self.theta1!r})"

    # serialization ----------------------------------------------------
    def to_json(self) -> dict:
        out = {"N": self.N, "kind": self.kind}
        if self.kind == "band":
            out["theta0"] = self.theta0
        if self.kind != "full":
            out["theta1"] = self.theta1
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AngularDomain":
        kind = obj["kind"]
        if kind == "full":
            return cls.full(obj["N"])
        if kind == "cap":
            return cls.cap(obj["N"], obj["theta1"])
        return cls.band(obj["N"], obj["theta0"], obj["theta1"])


def contains(domain: AngularDomain, theta: float) -> bool:
    """Membership of a polar angle in the open domain."""
    if not 0.0 <= theta <= PI:
        raise PreconditionError(f"polar angle must lie in [0, pi], got {theta}")
    lo_ok = theta > domain.theta0 if domain.left_dirichlet else True
    hi_ok = theta < domain.theta1 if domain.right_dirichlet else True
    if domain.kind == "cap" and domain.theta1 == PI:
        # the antipodal point is removed from a cap of half-angle pi
        hi_ok = theta < PI
    return lo_ok and hi_ok


def shrink(domain: AngularDomain, margin: float) -> AngularDomain:
    """Move every Dirichlet boundary inward by ``margin`` radians.

    Poles are not boundaries and stay put; the full sphere is returned unchanged.
    """
    if not margin > 0.0:
        raise PreconditionError(f"shrink margin must be positive, got {margin}")
    if not domain.has_boundary:
        return domain
    t0 = domain.theta0 + margin if domain.left_dirichlet else domain.theta0
    t1 = domain.theta1 - margin if domain.right_dirichlet else domain.theta1
    if not t1 > t0:
        raise EmptyDomainError(f"margin {margin} consumes {domain.describe()}")
    if domain.kind == "cap":
        return AngularDomain.cap(domain.N, t1)
    return AngularDomain.band(domain.N, t0, t1)


def inner_domain(domain: AngularDomain, fraction: float = 0.25) -> AngularDomain:
    """A compactly contained subdomain, shrunk by ``fraction`` of the angular extent.

    Domains without a Dirichlet boundary (full sphere, cap of half-angle pi)
    get a cap of half-angle ``(1 - fraction) * pi`` instead, so the result
    always has a boundary.
    """
    if not 0.0 < fraction < 1.0:
        raise PreconditionError("fraction must lie in (0, 1)")
    if not domain.has_boundary:
        return AngularDomain.cap(domain.N, (1.0 - fraction) * PI)
    return shrink(domain, fraction * domain.extent)


@dataclass(frozen=True)
class ConeSection:
    """The truncated cone ``{(r, omega): omega in domain, rho < r < R}``."""

    domain: AngularDomain
    rho: float
    R: float = math.inf

    def __post_init__(self):
        if not (self.rho > 0.0 and self.R > self.rho):
            raise PreconditionError(f"need 0 < rho < R, got rho={self.rho}, R={self.R}")

    def to_json(self) -> dict:
        return {"domain": self.domain.to_json(), "rho": self.rho,
                "R": None if math.isinf(self.R) else self.R}
