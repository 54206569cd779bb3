"""Pass/fail evidence records for existence and nonexistence of supersolutions.

Every certificate serializes to ``{"kind", "verdict", "evidence", ...}``
with plain floats only, so identical inputs give byte-identical JSON.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .cone import DiscreteField, Identity, RadialAngular, annular_eigenvalue
from .errors import ConvergenceError, GapFailure, PreconditionError, SearchExhausted
from .exponents import (alpha_for_exponent, characteristic_roots,
                        critical_exponent_from_alpha, exponent_gap, hardy_floor)
from .geometry import AngularDomain, inner_domain
from .radial import Constant
from .spectral import (AngularPotential, EigenEstimate, assemble, extrapolated_principal,
                       principal_eigenpair)

STRONG_SLACK = 1e-12
WEAK_SLACK = 1e-10
SEARCH_MAX_EXP = 60


def _f(x):
    return None if x is None else float(x)


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


# ----------------------------------------------------------------------------
# supersolutions


@dataclass(frozen=True)
class SupersolutionCertificate:
    candidate: dict
    grid: dict
    strong_margin: float | None
    trials: int | None
    weak_margin: float | None
    passed: bool
    flags: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return _verdict(self.passed)

    def to_json(self) -> dict:
        return {"kind": "supersolution", "verdict": self.verdict,
                "evidence": {"candidate": self.candidate, "grid": self.grid,
                             "strong_margin": _f(self.strong_margin),
                             "weak_trials": self.trials, "weak_min_margin": _f(self.weak_margin),
                             "flags": list(self.flags), **self.extra}}


def effective_lambda(domain: AngularDomain, matrix=None, n: int = 2000):
    """Angular eigenvalue seen by r^beta phi_1 under ``matrix``, with its estimate.

    For the identity this is lambda_1 minus the Richardson error bar, a
    conservative lower value.  For a constant L_d coefficient it is d itself.
    """
    matrix = matrix or Identity()
    est = extrapolated_principal(domain, n)
    if isinstance(matrix, Identity):
        return est.value - est.error, est
    if isinstance(matrix, RadialAngular) and isinstance(matrix.coeff, Constant):
        return matrix.coeff.value, est
    raise PreconditionError("power supersolutions are certified for the identity and constant L_d only")


def verify_supersolution_strong(domain: AngularDomain, N: int, p: float, c: float,
                                matrix=None, n: int = 2000,
                                slack: float = STRONG_SLACK) -> SupersolutionCertificate:
    """Pointwise check of u = c r^beta phi_1, beta = 2/(1-p), phi_1 with max 1.

    Since beta p = beta - 2,  -div(a grad u) - u^p = r^(beta-2) phi_1 [c g - c^p phi_1^(p-1)]
    with g = lambda - beta (beta + N - 2); the bracket is evaluated at every mesh node.
    """
    if N != domain.N:
        raise PreconditionError("dimension mismatch")
    if not p > 1 or not c > 0:
        raise PreconditionError("need p > 1 and c > 0")
    lam, est = effective_lambda(domain, matrix, n)
    _, phi = principal_eigenpair(assemble(domain, n))
    phi = phi / phi.max()
    beta = alpha_for_exponent(p)
    g = exponent_gap(lam, N, p)
    bracket = c * g - c**p * phi ** (p - 1)
    margin = float(bracket.min())
    cand = {"form": "c r^beta phi1", "c": float(c), "beta": beta, "p": float(p),
            "phi1_normalization": "max=1", "matrix": (matrix or Identity()).to_json()}
    grid = {"theta_nodes": n, "lambda_used": lam, "lambda_estimate": est.to_json()}
    return SupersolutionCertificate(cand, grid, margin, None, None, margin >= -slack,
                                    extra={"gap": g, "slack": slack})


def power_candidate(mesh, p: float, c: float) -> DiscreteField:
    """c r^beta phi_1 sampled on a cone mesh, phi_1 the mesh eigenvector with max 1."""
    _, phi = principal_eigenpair(mesh.angular)
    phi = phi / phi.max()
    beta = alpha_for_exponent(p)
    interp = mesh.angular.mesh.interpolate
    return DiscreteField.from_function(mesh, lambda r, t: c * r**beta * interp(phi, t))


def _trial_function(rng, shape):
    nr, nt = shape
    out = np.zeros(shape)
    wr = int(rng.integers(1, max(2, nr // 3)))
    wt = int(rng.integers(1, max(2, nt // 3)))
    ci = rng.uniform(0, nr - 1)
    cj = rng.uniform(0, nt - 1)
    i = np.arange(nr)
    j = np.arange(nt)
    br = np.where(np.abs(i - ci) < wr, np.cos(0.5 * np.pi * (i - ci) / wr) ** 2, 0.0)
    bt = np.where(np.abs(j - cj) < wt, np.cos(0.5 * np.pi * (j - cj) / wt) ** 2, 0.0)
    out = np.outer(br, bt)
    if not out.any():
        out[int(round(ci)), int(round(cj))] = 1.0
    return out.ravel()


def verify_supersolution_weak(fld: DiscreteField, p: float, trials: int = 100, seed: int = 0,
                              slack: float = WEAK_SLACK) -> SupersolutionCertificate:
    """Discrete weak form  sum phi (K u + KB u_B - M u^p) >= -slack * scale  for random bumps.

    Test functions are tensor cos^2 bumps with random centers and widths,
    supported on interior nodes; trial t uses the generator seeded by
    (seed, t), so trials are independent of evaluation order.
    """
    if not np.all(fld.interior > 0):
        raise PreconditionError("field must be positive on the mesh interior")
    if trials < 0:
        raise PreconditionError("trials must be nonnegative")
    mesh = fld.mesh
    lin = mesh.apply(fld.interior, fld.boundary)
    nonlin = mesh.mass * fld.interior**p
    worst = math.inf
    for t in range(trials):
        phi = _trial_function(np.random.default_rng([seed, t]), mesh.shape)
        margin = float(phi @ (lin - nonlin))
        scale = float(phi @ (np.abs(lin) + nonlin))
        worst = min(worst, margin / scale)
    flags = ("no-trials",) if trials == 0 else ()
    weak = None if trials == 0 else worst
    ok = trials == 0 or worst >= -slack
    cand = {"form": "discrete field", "p": float(p)}
    return SupersolutionCertificate(cand, mesh.to_json(), None, trials, weak, ok, flags,
                                    extra={"seed": seed, "slack": slack,
                                           "margin_normalization": "relative to trial scale"})


def power_lift(fld: DiscreteField, p0: float, p: float) -> DiscreteField:
    """a^(1/(1-p)) u^(1/a) with a = (p-1)/(p0-1): supersolution at p0 -> at p."""
    if not p >= p0 > 1:
        raise PreconditionError("need p >= p0 > 1")
    if np.any(fld.interior <= 0) or np.any(fld.boundary < 0):
        raise PreconditionError("power lift needs a positive field")
    a = (p - 1.0) / (p0 - 1.0)
    s = a ** (1.0 / (1.0 - p)) if p != p0 else 1.0
    return DiscreteField(fld.mesh, s * fld.interior ** (1.0 / a), s * fld.boundary ** (1.0 / a))


# ----------------------------------------------------------------------------
# nonexistence


@dataclass(frozen=True)
class NonexistenceCertificate:
    p: float
    alpha: float
    c: float
    R_star: float | None
    mu: float | None
    Lambda1: float | None
    passed: bool
    domain_prime: dict
    matrix: dict
    steps: int
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return _verdict(self.passed)

    def to_json(self) -> dict:
        ev = {"p": self.p, "alpha": self.alpha, "c": self.c, "alpha(p-1)": self.alpha * (self.p - 1),
              "R_star": _f(self.R_star), "mu": _f(self.mu), "Lambda1": _f(self.Lambda1),
              "domain_prime": self.domain_prime, "matrix": self.matrix, "dyadic_steps": self.steps}
        ev.update(self.extra)
        return {"kind": "nonexistence", "verdict": self.verdict, "evidence": ev}


def _annulus_upper(domain_prime, R, matrix, n_theta, per_decade):
    """Richardson value of Lambda_1(C^(R, 2R)) plus its error bar (a conservative upper value)."""
    coarse = annular_eigenvalue(domain_prime, R, 2.0, matrix, n_theta, per_decade)
    fine = annular_eigenvalue(domain_prime, R, 2.0, matrix, 2 * n_theta, 2 * per_decade)
    rich = (4 * fine - coarse) / 3
    return rich + abs(rich - fine), EigenEstimate(rich, coarse, fine, (n_theta, 2 * n_theta))


def nonexistence_certificate(domain: AngularDomain, N: int, p: float, alpha: float,
                             c: float = 1.0, matrix=None, domain_prime: AngularDomain | None = None,
                             n_theta: int = 200, per_decade: int = 200,
                             max_exp: int = SEARCH_MAX_EXP) -> NonexistenceCertificate:
    """Dyadic search for R* with c^(p-1) (2R*)^(alpha(p-1)) > Lambda_1(C_Omega'^(R*, 2R*)).

    A positive supersolution u >= c r^alpha makes -div(a grad u) - W u >= 0 with
    W = u^(p-1) >= mu on the annulus, impossible once mu exceeds the annulus
    eigenvalue.  Lambda_1 enters through a conservative upper value.
    """
    if N != domain.N:
        raise PreconditionError("dimension mismatch")
    if not (alpha < 0 and c > 0 and p > 1):
        raise PreconditionError("need alpha < 0, c > 0, p > 1")
    if not p < critical_exponent_from_alpha(alpha):
        raise PreconditionError(
            f"p={p} is not below 1 - 2/alpha = {critical_exponent_from_alpha(alpha)}")
    matrix = matrix or Identity()
    dprime = domain_prime or inner_domain(domain)
    e = alpha * (p - 1)
    for j in range(max_exp + 1):
        R = 2.0**j
        mu = c ** (p - 1) * (2 * R) ** e
        lam_up, est = _annulus_upper(dprime, R, matrix, n_theta, per_decade)
        if mu > lam_up:
            return NonexistenceCertificate(float(p), float(alpha), float(c), R, mu, lam_up, True,
                                           dprime.to_json(), matrix.to_json(), j + 1,
                                           {"Lambda1_estimate": est.to_json()})
    raise SearchExhausted(f"no R* <= 2^{max_exp} found; inputs look inconsistent")


@dataclass(frozen=True)
class CriticalCertificate:
    eps: float
    lambda1: EigenEstimate
    lambda1_perturbed: EigenEstimate
    alpha_minus: float
    alpha_tilde: float
    p_star: float
    gap: float
    search: NonexistenceCertificate | None
    domain_prime: dict

    @property
    def passed(self) -> bool:
        return self.search is not None and self.search.passed

    @property
    def verdict(self) -> str:
        return _verdict(self.passed)

    def to_json(self) -> dict:
        ev = {"eps": self.eps, "lambda1": self.lambda1.to_json(),
              "lambda1_perturbed": self.lambda1_perturbed.to_json(),
              "alpha_minus": self.alpha_minus, "alpha_tilde": self.alpha_tilde,
              "p_star": self.p_star, "alpha_tilde(p*-1)+2": self.gap,
              "domain_prime": self.domain_prime,
              "search": None if self.search is None else self.search.to_json()}
        return {"kind": "critical-nonexistence", "verdict": self.verdict, "evidence": ev}


def critical_case_certificate(domain: AngularDomain, N: int, matrix=None,
                              domain_prime: AngularDomain | None = None, eps: float | None = None,
                              n: int = 2000, c: float = 1.0) -> CriticalCertificate:
    """Nonexistence at p = p* through the improved exponent of -Delta_omega - eps chi_Omega'.

    Both eigenvalues come from the same meshes, so eps = 0 reproduces alpha_minus
    exactly and the gap alpha_tilde (p* - 1) + 2 = 2 (alpha_tilde - alpha_minus)/|alpha_minus|
    is exactly zero, which fails.
    """
    if matrix is not None and not isinstance(matrix, Identity):
        raise PreconditionError("the critical-case route is implemented for the identity matrix")
    if N != domain.N:
        raise PreconditionError("dimension mismatch")
    dprime = domain_prime or inner_domain(domain)
    if not domain.compactly_contains(dprime):
        raise PreconditionError("the inner domain must be compactly contained")
    lam = extrapolated_principal(domain, n)
    floor = hardy_floor(N)
    if eps is None:
        eps = min(0.5, (lam.value - floor) / 2.0)
    if eps < 0:
        raise PreconditionError("eps must be nonnegative")
    V = AngularPotential.indicator(eps, dprime) if eps > 0 else AngularPotential.zero()
    lam_t = extrapolated_principal(domain, n, V)
    am = characteristic_roots(lam.value, N).alpha_minus
    at = characteristic_roots(lam_t.value, N).alpha_minus
    pstar = critical_exponent_from_alpha(am)
    gap = 2.0 * (at - am) / abs(am)
    search = None
    if gap <= 0:
        if eps > 0:
            raise GapFailure(f"perturbation eps={eps} did not raise the exponent (gap {gap})")
    else:
        search = nonexistence_certificate(domain, N, pstar, at, c, None, dprime)
    return CriticalCertificate(float(eps), lam, lam_t, am, at, pstar, gap, search, dprime.to_json())


# ----------------------------------------------------------------------------
# Green-bounded norm


@dataclass(frozen=True)
class GBReport:
    epsilon: float
    N: int
    estimate: float
    truncated: float
    tail_bound: float
    truncation_radius: float
    epsilon_star: float

    @property
    def tail_fraction(self) -> float:
        return self.tail_bound / (self.truncated + self.tail_bound)

    def norm_at(self, eps: float) -> float:
        return eps * self.estimate / self.epsilon

    def to_json(self) -> dict:
        return {"kind": "gb-norm", "epsilon": self.epsilon, "N": self.N, "estimate": self.estimate,
                "truncated_integral": self.truncated, "tail_bound": self.tail_bound,
                "tail_fraction": self.tail_fraction, "truncation_radius": self.truncation_radius,
                "epsilon_star": self.epsilon_star, "support": "|y| >= 1",
                "norm_at_epsilon_star": self.norm_at(self.epsilon_star)}


def _gb_integrand(t):
    # 1 / log^2(e^t + 2) written without overflow
    return 1.0 / (t + math.log1p(2.0 * math.exp(-t))) ** 2


def gb_norm_estimate(epsilon: float, N: int = 3, truncation_radius: float = 1e8,
                     safety: float = 0.99) -> GBReport:
    """sup_x int Gamma(x, y) W_eps(y) dy for W_eps = eps / (|y|^2 log^2(|y| + 2)) on |y| >= 1.

    For a radial density the Newtonian potential is radially decreasing, so
    the sup is the value at the origin,
        (eps / (N - 2)) int_0^inf dt / log^2(e^t + 2),   t = log |y|.
    The integral is split at t = log(truncation_radius); the tail is bounded
    by 1/T because log(e^t + 2) > t.  The returned epsilon_star scales the
    norm to ``safety`` < 1.
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    if int(N) != N or N < 3:
        raise PreconditionError("need an integer dimension N >= 3")
    T = math.log(truncation_radius)
    val, err, info = quad(_gb_integrand, 0.0, T, epsabs=0.0, epsrel=1e-13, limit=500,
                          full_output=1)[:3]
    if err > 1e-11 * val:
        raise ConvergenceError(f"GB quadrature error {err:.2e} too large")
    tail = 1.0 / T
    unit = (val + tail) / (N - 2)
    est = epsilon * unit
    return GBReport(float(epsilon), int(N), est, val, tail, truncation_radius,
                    safety * epsilon / est)
