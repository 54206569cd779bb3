"""Truncated cones over axisymmetric domains, discretized in (s = log r, theta).

For the matrices handled here, the identity and the L_d family with
tangential eigenvalue c(r) = d(r)/lambda1 and radial eigenvalue 1, the
Dirichlet energy is

    int r^(N-2) [u_s^2 + c(r) |grad_omega u|^2] ds domega,

and the L^2 mass is int u^2 r^N ds domega.  On a uniform s-grid this gives
the Kronecker structure

    K = Kr (x) M_theta + diag(hs r^(N-2) c) (x) K_theta,   M = diag(hs r^N) (x) M_theta,

with Kr the radial conductance network (r^(N-2)/hs at half nodes).  Every
off-diagonal entry is nonpositive, so K is an M-matrix whenever c > 0.
The angular factor is the same weighted scheme as the angular eigensolver,
which makes separable eigenproblems and discrete power solutions exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._tridiag import TridiagForm, lowest_eigenpairs
from .errors import PreconditionError
from .geometry import AngularDomain
from .radial import RadialCoefficient, ellipticity_window
from .spectral import AngularOperator, assemble, eigen_basis

DEFAULT_PER_DECADE = 32
EIGEN_PER_DECADE = 400
EIGEN_THETA_NODES = 400


@dataclass(frozen=True)
class Identity:
    name = "id"

    def c(self, r):
        return np.ones_like(np.asarray(r, dtype=float))

    def to_json(self):
        return {"name": self.name}


@dataclass(frozen=True)
class RadialAngular:
    """The L_d matrix: radial eigenvalue 1, tangential eigenvalue d(r)/lambda1."""

    coeff: RadialCoefficient
    lambda1: float
    name = "L_d"

    def __post_init__(self):
        if not self.lambda1 > 0:
            raise PreconditionError("the L_d matrix needs lambda1 > 0")

    def c(self, r):
        return np.asarray(self.coeff.d_at_radius(r), dtype=float) / self.lambda1

    def window(self):
        return ellipticity_window(self.coeff, self.lambda1)

    def to_json(self):
        return {"name": self.name, "coeff": self.coeff.to_json(), "lambda1": self.lambda1}


def radial_grid(rho: float, R: float, per_decade: int | None = None, hs: float | None = None):
    """Log-uniform nodes rho = r_0 < ... < r_M = R.  Either a density or the step is given."""
    if not (rho > 0 and R > rho and math.isfinite(R)):
        raise PreconditionError(f"need 0 < rho < R < inf, got {rho}, {R}")
    span = math.log(R / rho)
    if hs is None:
        M = max(4, int(math.ceil((per_decade or DEFAULT_PER_DECADE) * span / math.log(10))))
    else:
        M = int(round(span / hs))
        if M < 4 or abs(M * hs - span) > 1e-9 * span:
            raise PreconditionError("R/rho must be an integer power of exp(hs)")
    hs = span / M
    return math.log(rho) + hs * np.arange(M + 1), hs


def _radial_form(s: np.ndarray, hs: float, N: int, q_extra: np.ndarray) -> TridiagForm:
    """Interior radial network on nodes s[1:-1] with Dirichlet ends at s[0], s[-1]."""
    half = np.exp((N - 2) * (s[:-1] + 0.5 * hs)) / hs
    r = np.exp(s[1:-1])
    return TridiagForm(half[1:-1], float(half[0]), float(half[-1]), q_extra, hs * r**N)


@dataclass(frozen=True)
class ConeMesh:
    """Discrete Dirichlet problem on C_Omega^(rho, R).

    Interior unknowns are ordered radius-major, ``index = i * n_theta + j``.
    Boundary nodes are the two radial faces (all angular nodes) followed by
    the lateral Dirichlet angles at every interior radius.
    """

    angular: AngularOperator
    s: np.ndarray = field(repr=False)
    hs: float
    N: int
    matrix: object
    K: sp.csr_matrix = field(repr=False)
    KB: sp.csr_matrix = field(repr=False)
    mass: np.ndarray = field(repr=False)
    boundary_r: np.ndarray = field(repr=False)
    boundary_theta: np.ndarray = field(repr=False)

    @property
    def domain(self) -> AngularDomain:
        return self.angular.domain

    @property
    def theta(self) -> np.ndarray:
        return self.angular.mesh.theta

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.s[1:-1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.s.size - 2, self.theta.size

    @property
    def rho(self) -> float:
        return float(math.exp(self.s[0]))

    @property
    def R(self) -> float:
        return float(math.exp(self.s[-1]))

    def grids(self):
        """(r, theta) arrays of the interior nodes, each of shape ``self.shape``."""
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def sample(self, f):
        """Evaluate f(r, theta) on interior and boundary nodes."""
        rr, tt = self.grids()
        return (np.asarray(f(rr, tt), dtype=float).ravel(),
                np.asarray(f(self.boundary_r, self.boundary_theta), dtype=float))

    def apply(self, uI: np.ndarray, uB: np.ndarray) -> np.ndarray:
        """Weak-form operator rows: K uI + KB uB."""
        return self.K @ uI + self.KB @ uB

    def to_json(self) -> dict:
        return {"domain": self.domain.to_json(), "rho": self.rho, "R": self.R,
                "radial_intervals": self.s.size - 1, "hs": self.hs,
                "theta_nodes": int(self.theta.size), "matrix": self.matrix.to_json()}


def build_cone_mesh(domain: AngularDomain, rho: float, R: float, matrix=None,
                    n_theta: int = 64, per_decade: int | None = None,
                    hs: float | None = None) -> ConeMesh:
    matrix = matrix or Identity()
    ang = assemble(domain, n_theta)
    s, hs = radial_grid(rho, R, per_decade, hs)
    N = domain.N
    nr, nt = s.size - 2, n_theta
    r = np.exp(s[1:-1])
    c = matrix.c(r)
    rad = _radial_form(s, hs, N, np.zeros(nr))
    Kr = sp.diags([rad.off, rad.diag, rad.off], [-1, 0, 1])
    lap = ang.laplace_form
    Kt = sp.diags([lap.off, lap.diag, lap.off], [-1, 0, 1])
    mt = lap.m
    ang_w = hs * r ** (N - 2) * c
    K = (sp.kron(Kr, sp.diags(mt)) + sp.kron(sp.diags(ang_w), Kt)).tocsr()
    mass = np.kron(hs * r**N, mt)

    # boundary coupling: radial faces then lateral Dirichlet angles
    cols, rows, vals = [], [], []
    br, bt = [], []
    face_g = (rad.g_left, rad.g_right)
    for f, (i, gface) in enumerate(zip((0, nr - 1), face_g)):
        for j in range(nt):
            rows.append(i * nt + j)
            cols.append(len(br))
            vals.append(-gface * mt[j])
            br.append(math.exp(s[0] if f == 0 else s[-1]))
            bt.append(ang.mesh.theta[j])
    lateral = []
    if domain.left_dirichlet:
        lateral.append((0, lap.g_left, domain.theta0))
    if domain.right_dirichlet:
        lateral.append((nt - 1, lap.g_right, domain.theta1))
    for j, g, ang_b in lateral:
        for i in range(nr):
            rows.append(i * nt + j)
            cols.append(len(br))
            vals.append(-g * ang_w[i])
            br.append(r[i])
            bt.append(ang_b)
    KB = sp.csr_matrix((vals, (rows, cols)), shape=(nr * nt, len(br)))
    return ConeMesh(ang, s, hs, N, matrix, K, KB, mass, np.array(br), np.array(bt))


@dataclass(frozen=True)
class DiscreteField:
    """Nodal values on a cone mesh: interior (radius-major) and boundary."""

    mesh: ConeMesh
    interior: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (np.all(np.isfinite(self.interior)) and np.all(np.isfinite(self.boundary))):
            raise PreconditionError("field entries must be finite")

    @classmethod
    def from_function(cls, mesh: ConeMesh, f) -> "DiscreteField":
        uI, uB = mesh.sample(f)
        return cls(mesh, uI, uB)

    @property
    def grid(self) -> np.ndarray:
        return self.interior.reshape(self.mesh.shape)

    def to_csv(self) -> str:
        rr, tt = self.mesh.grids()
        lines = ["r,theta,w"]
        for r, t, w in zip(rr.ravel(), tt.ravel(), self.interior):
            lines.append(f"{r!r},{t!r},{w!r}")
        return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# separable annular eigenvalues


def _angular_spectrum(domain: AngularDomain, n_theta: int):
    """Generator of angular Dirichlet eigenvalues (V = 0), computed in growing blocks."""
    op = assemble(domain, n_theta)
    K = 4
    done = 0
    while True:
        K = min(K, n_theta // 4)
        lams = eigen_basis(op, K).lambdas
        for lam in lams[done:]:
            yield float(lam)
        done = K
        if K == n_theta // 4:
            return
        K *= 2


@dataclass(frozen=True)
class AnnularEigen:
    value: float
    modes_used: int
    per_mode: tuple
    rho: float
    factor: float


def annular_eigenvalue(domain: AngularDomain, rho: float, factor: float, matrix=None,
                       n_theta: int = EIGEN_THETA_NODES, per_decade: int = EIGEN_PER_DECADE,
                       details: bool = False):
    """Principal Dirichlet eigenvalue of -div(a grad) on C_Omega^(rho, factor rho).

    Each angular mode k contributes a radial problem whose eigenvalue grows
    with lambda_k and is at least lambda_k min c(r)/r^2; modes are added
    until that bound exceeds the running minimum.
    """
    matrix = matrix or Identity()
    if not factor > 1:
        raise PreconditionError("factor must exceed 1")
    # solve in x = r / rho on (1, factor); Lambda(rho) = Lambda_x / rho^2
    s, hs = radial_grid(1.0, factor, per_decade)
    x = np.exp(s[1:-1])
    c = matrix.c(rho * x)
    if np.any(c <= 0):
        raise PreconditionError("matrix is not elliptic on this annulus")
    floor = float(np.min(c / x**2))
    weight = hs * x ** (domain.N - 2) * c
    best = math.inf
    per_mode = []
    for lam in _angular_spectrum(domain, n_theta):
        if lam * floor > best:
            break
        form = _radial_form(s, hs, domain.N, lam * weight)
        val = float(lowest_eigenpairs(form, 1)[0][0])
        per_mode.append(val)
        best = min(best, val)
    else:
        raise PreconditionError("angular spectrum exhausted before the truncation bound held")
    scale = rho ** -2
    out = AnnularEigen(best * scale, len(per_mode), tuple(v * scale for v in per_mode), rho, factor)
    return out if details else out.value


def scaling_curve(domain: AngularDomain, matrix, rhos, factor: float = 2.0, **kw):
    """Table of (rho, Lambda_1(C^(rho, factor rho)) rho^2) and the spread max/min."""
    rhos = list(rhos)
    if any(not r > 0 for r in rhos) or any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise PreconditionError("rhos must be positive and increasing")
    table = [(float(r), annular_eigenvalue(domain, r, factor, matrix, **kw) * r * r) for r in rhos]
    vals = [v for _, v in table]
    spread = max(vals) / min(vals) if vals else 1.0
    return table, spread


# ----------------------------------------------------------------------------
# maximum principle


def maximum_principle_check(mesh: ConeMesh, trials: int = 10, seed: int = 0) -> bool:
    """M-matrix structure of [K | KB] plus sampled nonnegativity of Dirichlet solutions."""
    full = sp.hstack([mesh.K, mesh.KB]).tocsr()
    diag = mesh.K.diagonal()
    off = full.copy()
    off.setdiag(0)  # hstack keeps interior columns first, so this clears K's diagonal
    off.eliminate_zeros()
    if off.nnz and off.data.max() > 0:
        return False
    if np.any(diag <= 0):
        return False
    rowsum = np.asarray(full.sum(axis=1)).ravel()
    if np.any(rowsum < -1e-12 * np.abs(diag).max()):
        return False
    rng = np.random.default_rng(seed)
    lu = splu(mesh.K.tocsc())
    for _ in range(trials):
        g = rng.random(mesh.KB.shape[1])
        u = lu.solve(-(mesh.KB @ g))
        if u.min() < -1e-12 * max(1.0, g.max()):
            return False
    return True


# ----------------------------------------------------------------------------
# Harnack exponent


@dataclass(frozen=True)
class HarnackEstimate:
    C_S: float
    alpha: float
    samples: int
    level_ratios: tuple
    radii: tuple
    data: str = "sparse"

    def to_json(self):
        return {"C_S": self.C_S, "alpha": self.alpha, "samples": self.samples,
                "level_ratios": list(self.level_ratios), "radii": list(self.radii),
                "boundary_data": self.data, "kind": "empirical estimate"}


def harnack_exponent(domain: AngularDomain, domain_prime: AngularDomain, matrix=None,
                     rho: float = 1.0, levels: int = 3, trials: int = 10, seed: int = 0,
                     n_theta: int = 64, per_decade: int = DEFAULT_PER_DECADE,
                     same_data: bool = False, data: str = "sparse") -> HarnackEstimate:
    """Empirical strong-Harnack constant from random positive solutions.

    At r_n = 2^n rho a solution with random nonnegative Dirichlet data is
    computed on C_Omega^(3 r_n/8, 7 r_n) and inf/sup is taken over
    C_Omega'^(3 r_n/4, 7 r_n/2), the doubled annulus of the chain argument.
    The worst ratio is C_S and alpha = log2 C_S.  With ``same_data`` every
    level reuses the first level's boundary vectors.

    ``data="sparse"`` draws point masses at one to three random boundary
    nodes; these approach the extremal (Poisson-kernel) solutions that fix
    the Harnack constant.  ``data="uniform"`` draws i.i.d. uniform values,
    which only probes nearly flat solutions.
    """
    if data not in ("sparse", "uniform"):
        raise PreconditionError(f"unknown boundary data family {data!r}")
    if levels < 3:
        raise PreconditionError("need at least three dyadic levels")
    if not domain.compactly_contains(domain_prime):
        raise PreconditionError("the inner domain must be compactly contained")
    rng = np.random.default_rng(seed)
    ratios, radii = [], []
    samples = 0
    stored = None
    for n in range(1, levels + 1):
        rn = rho * 2.0**n
        mesh = build_cone_mesh(domain, 3 * rn / 8, 7 * rn, matrix, n_theta, per_decade)
        lu = splu(mesh.K.tocsc())
        rr, tt = mesh.grids()
        inside = np.array([domain_prime.contains(t) for t in mesh.theta])
        sel = ((rr >= 0.75 * rn * (1 - 1e-12)) & (rr <= 3.5 * rn * (1 + 1e-12))
               & inside[None, :]).ravel()
        worst = 1.0
        for k in range(trials):
            if same_data and stored is not None and len(stored) > k:
                g = stored[k]
            else:
                g = _random_data(rng, mesh.KB.shape[1], data)
                if same_data:
                    stored = (stored or []) + [g]
            u = lu.solve(-(mesh.KB @ g))[sel]
            if not u.max() > 0:
                raise PreconditionError("sampled solution vanished identically")
            worst = min(worst, float(u.min() / u.max()))
            samples += 1
        ratios.append(worst)
        radii.append(rn)
    C = min(ratios)
    if not 0.0 < C < 1.0:
        raise PreconditionError(f"degenerate Harnack ratio {C}")
    return HarnackEstimate(C, math.log2(C), samples, tuple(ratios), tuple(radii), data)


def _random_data(rng, n: int, family: str) -> np.ndarray:
    if family == "uniform":
        return rng.random(n)
    g = np.zeros(n)
    m = int(rng.integers(1, 4))
    g[rng.choice(n, size=m, replace=False)] = rng.random(m) + 0.5
    return g

