"""Dirichlet eigenproblem for -Delta_omega - V on axisymmetric spherical domains.

For functions of the polar angle alone the Laplace-Beltrami operator on
S^{N-1} is

    -(1/w) (w u')',     w(theta) = sin^{N-2}(theta),

so the angular problem is a weighted Sturm-Liouville problem.  It is
discretized with second-order central differences on a uniform grid; the
flux ``w u'`` is evaluated at half nodes so the matrix is symmetric in the
weighted inner product and has nonpositive off-diagonals.  At a pole the
half-node weight vanishes, which is the ghost-node reflection u_{-1} = u_0
of a smooth axisymmetric function.

Inner products carry the area of S^{N-2}, so eigenfunctions are normalized
in L^2(Omega) with the true surface measure.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._tridiag import TridiagForm, lowest_eigenpairs
from .errors import MeshTooCoarseError, PreconditionError
from .geometry import AngularDomain

MIN_NODES = 16


def orbit_area(N: int) -> float:
    """Surface area of the unit (N-2)-sphere, the orbit of a polar angle in S^{N-1}."""
    k = N - 1
    return 2.0 * math.pi ** (k / 2.0) / math.gamma(k / 2.0)


def sphere_area(N: int) -> float:
    """Surface area of S^{N-1}."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class AngularMesh:
    domain: AngularDomain
    n: int
    h: float
    theta: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    half_weights: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, domain: AngularDomain, n: int) -> "AngularMesh":
        if n < MIN_NODES:
            raise MeshTooCoarseError(f"need at least {MIN_NODES} angular nodes, got {n}")
        left_pole = not domain.left_dirichlet
        right_pole = not domain.right_dirichlet
        # pole ends sit half a cell beyond the first node, Dirichlet ends a full cell
        cells = n - 1 + (0.5 if left_pole else 1.0) + (0.5 if right_pole else 1.0)
        h = domain.extent / cells
        start = domain.theta0 + (0.5 * h if left_pole else h)
        theta = start + h * np.arange(n)
        p = domain.N - 2
        weights = np.sin(theta) ** p
        half = np.concatenate([[theta[0] - 0.5 * h], theta + 0.5 * h])
        half_weights = np.abs(np.sin(half)) ** p
        if left_pole:
            half_weights[0] = 0.0
        if right_pole:
            half_weights[-1] = 0.0
        return cls(domain, n, h, theta, weights, half_weights)

    @property
    def area(self) -> float:
        return orbit_area(self.domain.N)

    @property
    def mass(self) -> np.ndarray:
        return self.area * self.h * self.weights

    def boundary_angles(self) -> tuple[float, float]:
        return self.domain.theta0, self.domain.theta1

    def interpolate(self, values: np.ndarray, theta) -> np.ndarray:
        """Piecewise-linear interpolation of nodal values.

        Dirichlet ends are pinned to zero; at a pole the function is
        extended flat (it is even about the pole).
        """
        th = np.asarray(theta, dtype=float)
        if np.any(th < self.domain.theta0) or np.any(th > self.domain.theta1):
            raise PreconditionError("polar angle outside the angular domain")
        xs = [self.domain.theta0] if self.domain.left_dirichlet else []
        ys = [0.0] if self.domain.left_dirichlet else []
        xs = np.concatenate([xs, self.theta, [self.domain.theta1] if self.domain.right_dirichlet else []])
        ys = np.concatenate([ys, values, [0.0] if self.domain.right_dirichlet else []])
        return np.interp(th, xs, ys)


@dataclass(frozen=True)
class AngularPotential:
    """Bounded nonnegative potential ``eps * indicator(support)``; ``eps = 0`` is V = 0."""

    eps: float = 0.0
    support: AngularDomain | None = None

    def __post_init__(self):
        if self.eps < 0 or not math.isfinite(self.eps):
            raise PreconditionError("potential must be finite and nonnegative")

    @classmethod
    def zero(cls) -> "AngularPotential":
        return cls()

    @classmethod
    def indicator(cls, eps: float, support: AngularDomain) -> "AngularPotential":
        return cls(eps, support)

    @property
    def is_zero(self) -> bool:
        return self.eps == 0.0

    @property
    def tag(self) -> str:
        if self.is_zero:
            return "zero"
        where = self.support.describe() if self.support is not None else "everywhere"
        return f"{self.eps!r}*indicator[{where}]"

    def sample(self, mesh: AngularMesh) -> np.ndarray:
        if self.is_zero:
            return np.zeros(mesh.n)
        if self.support is None:
            return np.full(mesh.n, self.eps)
        inside = np.array([self.support.contains(t) for t in mesh.theta])
        return self.eps * inside.astype(float)


@dataclass(frozen=True)
class AngularOperator:
    """Discrete -Delta_omega - V as a symmetric generalized tridiagonal problem."""

    mesh: AngularMesh
    potential: AngularPotential
    V: np.ndarray = field(repr=False)
    form: TridiagForm = field(repr=False)
    laplace_form: TridiagForm = field(repr=False)

    @property
    def domain(self) -> AngularDomain:
        return self.mesh.domain

    def is_m_matrix(self) -> bool:
        """Off-diagonals nonpositive and, after shifting by max V, weakly diagonally dominant."""
        if np.any(self.form.off > 0):
            return False
        shifted = self.form.diag + self.V.max(initial=0.0) * self.form.m
        rowsum = shifted.copy()
        rowsum[:-1] += self.form.off
        rowsum[1:] += self.form.off
        return bool(np.all(rowsum >= -1e-12 * np.abs(shifted).max()))


def assemble(domain: AngularDomain, n: int, V: AngularPotential | None = None) -> AngularOperator:
    V = V or AngularPotential.zero()
    mesh = AngularMesh.build(domain, n)
    area, h = mesh.area, mesh.h
    cond = area * mesh.half_weights / h
    m = mesh.mass
    vals = V.sample(mesh)
    lap = TridiagForm(cond[1:-1], float(cond[0]), float(cond[-1]), np.zeros(n), m)
    form = TridiagForm(cond[1:-1], float(cond[0]), float(cond[-1]), -vals * m, m)
    return AngularOperator(mesh, V, vals, form, lap)


@dataclass(frozen=True)
class SpectralDecomposition:
    operator: AngularOperator
    lambdas: np.ndarray
    phis: np.ndarray = field(repr=False)

    @property
    def K(self) -> int:
        return self.lambdas.size

    @property
    def mesh(self) -> AngularMesh:
        return self.operator.mesh

    @property
    def domain(self) -> AngularDomain:
        return self.operator.domain

    @property
    def N(self) -> int:
        return self.domain.N

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(self.mesh.mass * f * g))

    def phi_at(self, k: int, theta) -> np.ndarray:
        """k-th eigenfunction (1-based) interpolated at polar angles."""
        return self.mesh.interpolate(self.phis[k - 1], theta)

    def to_json(self) -> dict:
        return {"lambda": self.lambdas.tolist(), "phi": self.phis.tolist(),
                "theta": self.mesh.theta.tolist(), "K": self.K,
                "domain": self.domain.to_json(), "potential": self.operator.potential.tag,
                "nodes": self.mesh.n}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta"] + [f"phi{k + 1}" for k in range(self.K)])
        for i, t in enumerate(self.mesh.theta):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in self.phis[:, i]])
        return buf.getvalue()


def principal_eigenpair(op: AngularOperator, tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and its positive, L^2-normalized eigenfunction."""
    lams, vecs = lowest_eigenpairs(op.form, 1, tol=tol)
    phi = vecs[0]
    if np.any(phi <= 0):
        raise PreconditionError("principal eigenvector is not strictly positive")
    return float(lams[0]), phi


def eigen_basis(op: AngularOperator, K: int, tol: float = 1e-12) -> SpectralDecomposition:
    if K < 1 or K > op.mesh.n // 4:
        raise PreconditionError(f"K={K} exceeds the accuracy guard n/4 = {op.mesh.n // 4}")
    lams, vecs = lowest_eigenpairs(op.form, K, tol=tol)
    if K > 1 and not lams[1] - lams[0] > 1e-10 * max(1.0, abs(lams[0])):
        raise PreconditionError("principal eigenvalue is not simple")
    # final weighted Gram-Schmidt pass to push orthonormality to round-off
    m = op.mesh.mass
    for j in range(K):
        for i in range(j):
            vecs[j] -= np.sum(m * vecs[i] * vecs[j]) * vecs[i]
        vecs[j] /= math.sqrt(np.sum(m * vecs[j] ** 2))
    return SpectralDecomposition(op, lams, vecs)


@dataclass(frozen=True)
class Projection:
    coefficients: np.ndarray
    residual_norm: float
    psi_norm: float


def project(decomp: SpectralDecomposition, psi: np.ndarray) -> Projection:
    """Weighted-quadrature coefficients psi_k = <psi, phi_k> and the truncation residual."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (decomp.mesh.n,):
        raise PreconditionError("psi must be sampled on the decomposition mesh")
    dom = decomp.domain
    if (dom.left_dirichlet and psi[0] != 0.0) or (dom.right_dirichlet and psi[-1] != 0.0):
        raise PreconditionError("psi must vanish at the nodes next to the Dirichlet boundary")
    m = decomp.mesh.mass
    coeffs = decomp.phis @ (m * psi)
    resid = psi - coeffs @ decomp.phis
    return Projection(coeffs, math.sqrt(float(np.sum(m * resid ** 2))),
                      math.sqrt(float(np.sum(m * psi ** 2))))


@dataclass(frozen=True)
class Bump:
    """Smooth bump cos^2(pi |theta - center| / (2 width)) on |theta - center| < width."""

    center: float
    width: float

    def __call__(self, theta) -> np.ndarray:
        d = np.abs(np.asarray(theta, dtype=float) - self.center)
        return np.where(d < self.width, np.cos(0.5 * math.pi * d / self.width) ** 2, 0.0)

    def to_json(self) -> dict:
        return {"shape": "cos^2", "center": self.center, "width": self.width}


def default_bump(domain: AngularDomain, width_fraction: float = 0.2) -> Bump:
    """Bump of half-width ``width_fraction * extent`` centered on the pole (cap, sphere)
    or on the mid-angle (band); its support lies inside shrink(domain, width)."""
    width = width_fraction * domain.extent
    center = 0.5 * (domain.theta0 + domain.theta1) if domain.kind == "band" else 0.0
    return Bump(center, width)


@dataclass(frozen=True)
class EigenEstimate:
    value: float
    coarse: float
    fine: float
    nodes: tuple[int, int]

    @property
    def error(self) -> float:
        """Size of the Richardson correction, used as an error bar."""
        return abs(self.value - self.fine)

    def to_json(self) -> dict:
        return {"value": self.value, "coarse": self.coarse, "fine": self.fine,
                "nodes": list(self.nodes), "error_estimate": self.error}


def extrapolated_principal(domain: AngularDomain, n: int = 2000,
                           V: AngularPotential | None = None) -> EigenEstimate:
    """Principal eigenvalue from meshes n and 2n, Richardson-extrapolated for O(h^2)."""
    lam_c, _ = principal_eigenpair(assemble(domain, n, V))
    lam_f, _ = principal_eigenpair(assemble(domain, 2 * n, V))
    return EigenEstimate((4.0 * lam_f - lam_c) / 3.0, lam_c, lam_f, (n, 2 * n))
