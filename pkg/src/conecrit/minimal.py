"""Minimal positive solutions of -Delta v - V(omega)/|x|^2 v = 0 on C_Omega^1.

Separation of variables gives the series

    v_psi(r, omega) = sum_k psi_k r^(alpha_k) phi_k(omega),

where (lambda_k, phi_k) are the angular eigenpairs, alpha_k is the
negative characteristic root for lambda_k and psi_k = <psi, phi_k> are
the coefficients of the boundary bump psi at r = 1.  The checks below
evaluate the identities and asymptotic bounds this representation
implies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, SpectralFloorError
from .exponents import characteristic_roots, hardy_floor
from .geometry import AngularDomain
from .spectral import SpectralDecomposition, project

DEFAULT_K = 8


@dataclass(frozen=True)
class MinimalSolutionSeries:
    decomp: SpectralDecomposition
    psi: np.ndarray = field(repr=False)
    coefficients: np.ndarray
    alphas: np.ndarray
    K: int
    tail_alpha: float
    truncation_residual: float
    psi_tag: str = "custom"
    rho: float = 1.0

    @property
    def lambdas(self) -> np.ndarray:
        return self.decomp.lambdas[: self.K]

    @property
    def N(self) -> int:
        return self.decomp.N

    def phi_values(self, theta) -> np.ndarray:
        """(K, ...) array of eigenfunctions interpolated at ``theta``."""
        theta = np.asarray(theta, dtype=float)
        return np.array([self.decomp.phi_at(k + 1, theta) for k in range(self.K)])

    def tail_estimate(self, r) -> np.ndarray:
        """L^2(Omega) size of the dropped modes at radius r."""
        return self.truncation_residual * np.asarray(r, dtype=float) ** self.tail_alpha

    def to_json(self) -> dict:
        return {"psi_k": self.coefficients.tolist(), "alpha_k": self.alphas.tolist(),
                "lambda_k": self.lambdas.tolist(), "theta": self.decomp.mesh.theta.tolist(),
                "phi": self.decomp.phis[: self.K].tolist(), "K": self.K, "psi": self.psi_tag,
                "truncation_residual": self.truncation_residual, "tail_alpha": self.tail_alpha}


def build_series(decomp: SpectralDecomposition, psi, K: int | None = None,
                 psi_tag: str = "custom") -> MinimalSolutionSeries:
    """Series of the minimal solution generated by the nonnegative bump ``psi``.

    ``psi`` is sampled on the decomposition mesh.  The series keeps K terms;
    the exponent of the first dropped mode (or the last kept one when the
    decomposition has no more) scales the reported truncation tail.
    """
    psi = np.asarray(psi, dtype=float)
    if np.any(psi < 0) or not np.any(psi > 0):
        raise PreconditionError("psi must be nonnegative and not identically zero")
    K = min(DEFAULT_K, decomp.K) if K is None else K
    if not 1 <= K <= decomp.K:
        raise PreconditionError(f"K={K} must lie in [1, {decomp.K}]")
    floor = hardy_floor(decomp.N)
    if np.any(decomp.lambdas <= floor):
        raise SpectralFloorError("an angular eigenvalue lies at or below the Hardy floor")
    proj = project(decomp, psi)
    alphas = np.array([characteristic_roots(l, decomp.N).alpha_minus for l in decomp.lambdas])
    coeffs = proj.coefficients[:K]
    resid = psi - coeffs @ decomp.phis[:K]
    resid_norm = math.sqrt(float(np.sum(decomp.mesh.mass * resid**2)))
    tail_alpha = float(alphas[K]) if K < decomp.K else float(alphas[K - 1])
    return MinimalSolutionSeries(decomp, psi, coeffs, alphas[:K], K, tail_alpha,
                                 resid_norm, psi_tag)


def evaluate(series: MinimalSolutionSeries, r, theta):
    """sum_k psi_k r^alpha_k phi_k(theta), broadcasting r against theta."""
    r = np.asarray(r, dtype=float)
    if np.any(r < series.rho):
        raise PreconditionError(f"the series lives on r >= {series.rho}")
    r, theta = np.broadcast_arrays(r, np.asarray(theta, dtype=float))
    phis = series.phi_values(theta)
    powers = r[None, ...] ** series.alphas.reshape((-1,) + (1,) * r.ndim)
    out = np.sum(series.coefficients.reshape((-1,) + (1,) * r.ndim) * powers * phis, axis=0)
    return out if out.ndim else float(out)


def _gradient_pair(series: MinimalSolutionSeries, k: int, n: int) -> float:
    """int_{C^1} grad(r^a_k phi_k) . grad(r^a_n phi_n) dx, 1-based indices.

    Radial integral int_1^inf r^(a_k + a_n + N - 3) dr is done in closed
    form; the angular integrals are the mesh mass and flux quadratures.
    """
    if not (1 <= k <= series.K and 1 <= n <= series.K):
        raise PreconditionError("mode index outside the series")
    ak, an = series.alphas[k - 1], series.alphas[n - 1]
    expo = ak + an + series.N - 2
    if not expo < 0:
        raise PreconditionError("gradient integral diverges")
    form = series.decomp.operator.laplace_form
    fk, fn = series.decomp.phis[k - 1], series.decomp.phis[n - 1]
    ang = ak * an * form.inner(fk, fn) + form.quad(fk, fn)
    return float(ang / -expo)


def gradient_norm_check(series: MinimalSolutionSeries, k: int) -> tuple[float, float]:
    """(int |grad(r^a_k phi_k)|^2 over C^1, |alpha_k|)."""
    if not series.alphas[k - 1] < (2 - series.N) / 2:
        raise PreconditionError("gradient integral diverges")
    return _gradient_pair(series, k, k), abs(float(series.alphas[k - 1]))


def cross_gradient(series: MinimalSolutionSeries, k: int, n: int) -> float:
    return _gradient_pair(series, k, n)


def _scan(series, domain_prime: AngularDomain, rho: float, decades: float, per_decade: int):
    dom = series.decomp.domain
    if domain_prime.N != dom.N or not dom.compactly_contains(domain_prime):
        raise PreconditionError("the inner domain must be compactly contained in the domain")
    if not rho >= series.rho:
        raise PreconditionError(f"scan radius must be at least {series.rho}")
    theta = series.decomp.mesh.theta
    theta = theta[[domain_prime.contains(t) for t in theta]]
    if theta.size == 0:
        raise PreconditionError("no mesh nodes inside the inner domain")
    r = rho * np.logspace(0.0, decades, int(round(decades * per_decade)) + 1)
    return r, theta


@dataclass(frozen=True)
class LowerBound:
    c: float
    passed: bool
    drift_last_decade: float
    tail_at_rho: float
    radii: np.ndarray = field(repr=False)
    c_of_r: np.ndarray = field(repr=False)

    def to_json(self):
        return {"c": self.c, "pass": self.passed, "drift_last_decade": self.drift_last_decade,
                "tail_at_rho": self.tail_at_rho}


def lower_bound_check(series: MinimalSolutionSeries, domain_prime: AngularDomain,
                      rho: float, decades: float = 4.0, per_decade: int = 50) -> LowerBound:
    """inf of v_psi r^(-alpha_1) over C_Omega'^(rho, 10^decades rho) at mesh angles."""
    if not rho > series.rho:
        raise PreconditionError("need rho > 1")
    r, theta = _scan(series, domain_prime, rho, decades, per_decade)
    vals = evaluate(series, r[:, None], theta[None, :]) * r[:, None] ** (-series.alphas[0])
    c_r = vals.min(axis=1)
    c = float(c_r.min())
    last = c_r[r >= r[-1] / 10.0]
    drift = float((last.max() - last.min()) / abs(last.min())) if last.min() != 0 else math.inf
    tail = float(series.tail_estimate(rho))
    return LowerBound(c, bool(c > 0 and drift <= 0.01), drift, tail, r, c_r)


@dataclass(frozen=True)
class TailBound:
    C: float
    C_next: float
    passed: bool

    def to_json(self):
        return {"C": self.C, "C_at_10rho": self.C_next, "pass": self.passed}


def _remainder_sup(series, domain_prime, rho, per_decade=200):
    r, theta = _scan(series, domain_prime, rho, math.log10(2.0), per_decade)
    full = evaluate(series, r[:, None], theta[None, :])
    lead = series.coefficients[0] * r[:, None] ** series.alphas[0] * \
        series.decomp.phi_at(1, theta)[None, :]
    return float(np.max(np.abs(full - lead)))


def tail_bound_check(series: MinimalSolutionSeries, domain_prime: AngularDomain,
                     rho: float, tol: float = 0.1) -> TailBound:
    """C(rho) = sup over C_Omega'^(rho, 2 rho) of |v - psi_1 r^a_1 phi_1| / rho^a_2.

    Stability is judged against C(10 rho): pass when they agree to ``tol``.
    """
    if series.K < 2:
        return TailBound(0.0, 0.0, True)
    a2 = float(series.alphas[1])
    C = _remainder_sup(series, domain_prime, rho) / rho**a2
    C10 = _remainder_sup(series, domain_prime, 10 * rho) / (10 * rho) ** a2
    ok = C == C10 == 0.0 or (C10 > 0 and abs(C / C10 - 1.0) <= tol)
    return TailBound(float(C), float(C10), bool(ok))


def remainder_ratio(series: MinimalSolutionSeries, domain_prime: AngularDomain, radii):
    """max over Omega' of |v - lead| / lead at each radius."""
    _, theta = _scan(series, domain_prime, series.rho, 0.0, 1)
    radii = np.asarray(radii, dtype=float)
    full = evaluate(series, radii[:, None], theta[None, :])
    lead = series.coefficients[0] * radii[:, None] ** series.alphas[0] * \
        series.decomp.phi_at(1, theta)[None, :]
    return np.max(np.abs(full - lead) / lead, axis=1)


@dataclass(frozen=True)
class UpperCheck:
    passed: bool
    alpha1: float
    bound_exponent: int
    sup_profile: np.ndarray = field(repr=False)

    def to_json(self):
        return {"pass": self.passed, "alpha_1": self.alpha1, "2-N": self.bound_exponent,
                "sup_v_r^(N-2)": self.sup_profile.tolist()}


def fundamental_upper_check(series: MinimalSolutionSeries, r_min: float = 10.0,
                            decades: float = 4.0, per_decade: int = 25) -> UpperCheck:
    """v_psi r^(N-2) bounded and nonincreasing beyond r_min, i.e. v <= C |x|^(2-N)."""
    if not series.decomp.operator.potential.is_zero:
        raise PreconditionError("the fundamental-solution bound is checked for V = 0")
    N = series.N
    theta = series.decomp.mesh.theta
    r = r_min * np.logspace(0.0, decades, int(round(decades * per_decade)) + 1)
    sup = (evaluate(series, r[:, None], theta[None, :]) * r[:, None] ** (N - 2)).max(axis=1)
    finite = bool(np.all(np.isfinite(sup)))
    nonincreasing = bool(np.all(np.diff(sup) <= 1e-12 * np.abs(sup[:-1]).max()))
    exponent_ok = bool(series.lambdas[0] >= 0 and series.alphas[0] <= 2 - N)
    return UpperCheck(finite and nonincreasing and exponent_ok, float(series.alphas[0]), 2 - N, sup)
