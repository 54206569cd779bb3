"""Monotone iteration for -Delta w = w^p on truncated cones.

Between an ordered pair v <= U of a discrete subsolution and
supersolution, the iteration

    (K + M_diag) w_{k+1} = mass (w_k^p + m w_k) - KB g

with m >= p U^(p-1) increases from v and stays below U because
K + M_diag is an M-matrix and s -> s^p + m s is nondecreasing on [0, U].
It is implemented in increment form, (K + M_diag) delta = -F(w_k), so that
rounding cannot break monotonicity through cancellation.

The subsolution is the series of the minimal solution with discrete
radial exponents, which makes each mode exactly discrete-harmonic; the
supersolution is c r^beta phi_1 with c from the discrete exponent gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .cone import DiscreteField, Identity, build_cone_mesh, maximum_principle_check
from .errors import ConvergenceError, OrderingViolation, PreconditionError
from .exponents import alpha_for_exponent
from .geometry import AngularDomain
from .minimal import build_series
from .spectral import default_bump, eigen_basis

SHIFT_FACTOR = 1.1
ORDER_SLACK = 1e-10
MONOTONE_SLACK = 1e-12
DEFAULT_HS = math.log(3.0) / 32
DEFAULT_R_IN = 10.0 / 9.0


def _discrete_factor(N: int, hs: float):
    return math.exp((N - 2) * hs / 2)


def discrete_sigma(beta: float, N: int, hs: float) -> float:
    """Discrete analogue of -beta (beta + N - 2): (Kr r^beta)_i / (hs r_i^(beta + N - 2))."""
    A = _discrete_factor(N, hs)
    q = math.exp(beta * hs)
    return (A * (1 - q) + (1 - 1 / q) / A) / hs**2


def discrete_exponent(lam: float, N: int, hs: float) -> float:
    """Decaying exponent a with r^a phi exactly discrete-harmonic on a log grid of step hs.

    q = e^(a hs) is the smaller root of A q^2 - (A + 1/A + lam hs^2) q + 1/A = 0.
    """
    A = _discrete_factor(N, hs)
    B = A + 1 / A + lam * hs**2
    disc = B * B - 4.0
    if not disc > 0:
        raise PreconditionError("angular eigenvalue below the discrete Hardy floor")
    q_plus = (B + math.sqrt(disc)) / (2 * A)
    q_minus = 1.0 / (A * A * q_plus)
    return math.log(q_minus) / hs


@dataclass(frozen=True)
class BvpProblem:
    mesh: object
    p: float
    v: DiscreteField
    U: DiscreteField
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.v.mesh is self.mesh and self.U.mesh is self.mesh):
            raise PreconditionError("sub- and supersolution must live on the problem mesh")
        if np.any(self.v.interior > self.U.interior + ORDER_SLACK) or \
                np.any(self.v.boundary > self.U.boundary + ORDER_SLACK):
            raise OrderingViolation("subsolution exceeds supersolution")
        if np.any(self.v.interior < 0) or np.any(self.v.boundary < 0):
            raise PreconditionError("subsolution must be nonnegative")

    @property
    def g(self) -> np.ndarray:
        return self.v.boundary


def build_problem(domain: AngularDomain, p: float, R: float, r_in: float = DEFAULT_R_IN,
                  hs: float = DEFAULT_HS, n_theta: int = 64, K: int = 8,
                  c_fraction: float = 1.0, psi_amplitude: float | None = None) -> BvpProblem:
    """Ordered pair on C_Omega^(r_in, R) for the default bump and c r^beta phi_1.

    The bump amplitude is chosen so that v <= U holds with a factor 2 to
    spare unless ``psi_amplitude`` is given.
    """
    mesh = build_cone_mesh(domain, r_in, R, Identity(), n_theta, hs=hs)
    N = domain.N
    dec = eigen_basis(mesh.angular, K)
    bump = default_bump(domain)
    series = build_series(dec, bump(mesh.theta), K, psi_tag="default-bump")
    alphas_h = np.array([discrete_exponent(l, N, mesh.hs) for l in dec.lambdas])
    phis = dec.phis

    def vfun(r, t):
        # modes are sampled at mesh angles; lateral boundary nodes get 0
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        flat_t = np.asarray(t, dtype=float)
        for k in range(K):
            out += series.coefficients[k] * (r / r_in) ** alphas_h[k] * \
                mesh.angular.mesh.interpolate(phis[k], flat_t)
        return np.maximum(out, 0.0)

    phi1 = phis[0] / phis[0].max()
    beta = alpha_for_exponent(p)
    gap_h = dec.lambdas[0] + discrete_sigma(beta, N, mesh.hs)
    if not gap_h > 0:
        raise PreconditionError(f"p={p} is not above the discrete critical exponent")
    c = c_fraction * gap_h ** (1.0 / (p - 1.0))

    def ufun(r, t):
        return c * np.asarray(r, dtype=float) ** beta * mesh.angular.mesh.interpolate(phi1, t)

    v0 = DiscreteField.from_function(mesh, vfun)
    U = DiscreteField.from_function(mesh, ufun)
    if psi_amplitude is None:
        pos = v0.interior > 0
        psi_amplitude = min(1.0, 0.5 * float(np.min(U.interior[pos] / v0.interior[pos])))
    v = DiscreteField(mesh, psi_amplitude * v0.interior, psi_amplitude * v0.boundary)
    info = {"psi": bump.to_json(), "psi_amplitude": psi_amplitude, "K": K,
            "discrete_alphas": alphas_h.tolist(), "beta": beta, "c": c,
            "discrete_gap": gap_h, "c_fraction": c_fraction, "mesh": mesh.to_json()}
    return BvpProblem(mesh, p, v, U, info)


@dataclass(frozen=True)
class SolveResult:
    w: DiscreteField
    iterations: int
    residual: float
    min_increment: float
    squeeze_lower: float
    squeeze_upper: float
    history: tuple = ()

    def to_json(self) -> dict:
        return {"residual": self.residual, "iterations": self.iterations,
                "min_increment": self.min_increment,
                "squeeze": {"min(w - v)": self.squeeze_lower, "min(U - w)": self.squeeze_upper},
                "residual_history": list(self.history)}


def nonlinear_residual(mesh, w: np.ndarray, g: np.ndarray, p: float) -> np.ndarray:
    """Strong-form residual (K w + KB g)/mass - w^p at interior nodes."""
    return (mesh.K @ w + mesh.KB @ g) / mesh.mass - np.abs(w) ** p


def monotone_solve(problem: BvpProblem, tol: float = 1e-8, max_iter: int = 20000,
                   check_mp: bool = True, shift: str = "global") -> SolveResult:
    """Monotone iteration from v; at least one update is taken.

    ``shift="global"`` uses the constant 1.1 p max(U)^(p-1); ``"pointwise"``
    uses 1.1 p U^(p-1) node by node, which is also admissible and converges
    in far fewer iterations.
    """
    mesh, p = problem.mesh, problem.p
    N = mesh.N
    if not p > 1:
        raise PreconditionError("need p > 1")
    if not p <= N / (N - 2) + 1e-12:
        raise PreconditionError(f"constructive range is p <= N/(N-2) = {N / (N - 2)}")
    if check_mp and not maximum_principle_check(mesh, trials=2):
        raise PreconditionError("mesh fails the discrete maximum principle")
    U = problem.U.interior
    g = problem.g
    if shift == "global":
        m = np.full_like(U, SHIFT_FACTOR * p * (U.max() if U.size else 0.0) ** (p - 1))
    elif shift == "pointwise":
        m = SHIFT_FACTOR * p * U ** (p - 1)
    else:
        raise PreconditionError(f"unknown shift rule {shift!r}")
    A = (mesh.K + sp.diags(mesh.mass * m)).tocsc()
    lu = splu(A)
    w = problem.v.interior.copy()
    min_inc = math.inf
    history = []
    it = 0
    while True:
        F = mesh.K @ w + mesh.KB @ g - mesh.mass * w**p
        res = float(np.max(np.abs(F / mesh.mass))) if w.size else 0.0
        history.append(res)
        if res <= tol and it >= 1:
            break
        if it >= max_iter:
            raise ConvergenceError(f"monotone iteration stalled at residual {res:.3e}")
        delta = lu.solve(-F)
        min_inc = min(min_inc, float(delta.min()))
        if delta.min() < -MONOTONE_SLACK * max(1.0, float(np.abs(w).max())):
            raise OrderingViolation(f"iterate decreased by {-delta.min():.3e}")
        w = w + delta
        if np.any(w > U + ORDER_SLACK):
            raise OrderingViolation(f"iterate exceeds the supersolution by {np.max(w - U):.3e}")
        it += 1
    final = float(np.max(np.abs(nonlinear_residual(mesh, w, g, p)))) if w.size else 0.0
    lo = float(np.min(w - problem.v.interior)) if w.size else 0.0
    hi = float(np.min(U - w)) if w.size else 0.0
    return SolveResult(DiscreteField(mesh, w, g.copy()), it,
                       final, 0.0 if min_inc == math.inf else min_inc, lo, hi, tuple(history))


@dataclass(frozen=True)
class ExhaustionReport:
    radii: tuple
    results: tuple
    differences: tuple
    ratios: tuple
    region: tuple

    @property
    def stabilizing(self) -> bool:
        return bool(self.ratios) and all(r < 1.0 for r in self.ratios)

    def to_json(self):
        return {"radii": list(self.radii), "differences": list(self.differences),
                "ratios": list(self.ratios), "inner_region": list(self.region),
                "stabilizing": self.stabilizing,
                "levels": [r.to_json() | {"R": R} for r, R in zip(self.results, self.radii)]}


def exhaustion_solve(domain: AngularDomain, N: int, p: float, radii, tol: float = 1e-8,
                     inner_fraction: float = 1 / 3, shift: str = "global", **kw) -> ExhaustionReport:
    """Solve on C^(r_in, R_n) for increasing R_n with common nodes and compare on the inner region.

    The inner region is r_in < r <= inner_fraction R_0.  All levels share the
    radial step and inner radius, so their nodes coincide there.
    """
    radii = [float(R) for R in radii]
    if len(radii) < 3:
        raise PreconditionError("need at least three exhaustion levels")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError("radii must increase")
    if N != domain.N:
        raise PreconditionError("dimension mismatch")
    # fix the bump amplitude on the largest level so every level uses the same v
    amp = build_problem(domain, p, radii[-1], **kw).info["psi_amplitude"]
    results = []
    for R in radii:
        prob = build_problem(domain, p, R, psi_amplitude=amp, **kw)
        results.append(monotone_solve(prob, tol, shift=shift))
    r_cut = inner_fraction * radii[0]
    diffs = []
    for a, b in zip(results, results[1:]):
        ra = a.w.mesh.r
        sel = ra <= r_cut * (1 + 1e-12)
        na = int(sel.sum())
        wa = a.w.grid[:na]
        wb = b.w.grid[:na]
        if not np.allclose(a.w.mesh.r[:na], b.w.mesh.r[:na], rtol=1e-12):
            raise PreconditionError("levels do not share radial nodes")
        diffs.append(float(np.max(np.abs(wb - wa))))
    ratios = [d1 / d0 if d0 > 0 else 0.0 for d0, d1 in zip(diffs, diffs[1:])]
    return ExhaustionReport(tuple(radii), tuple(results), tuple(diffs), tuple(ratios),
                            (results[0].w.mesh.rho, r_cut))
