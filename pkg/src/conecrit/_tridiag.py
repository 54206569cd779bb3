"""Symmetric generalized tridiagonal eigenproblems K u = lam M u.

The stiffness matrix is stored as a conductance network: ``g[i]`` couples
nodes i and i+1, ``g_left``/``g_right`` tie the end nodes to a zero
Dirichlet ghost (zero at a regular pole), and ``q`` is an extra diagonal
term.  This keeps the quadratic form ``sum g (du)^2 + ...`` available in
flux form, which is exact for constants, and makes the M-matrix structure
explicit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import ConvergenceError, PreconditionError

RAYLEIGH_TOL = 1e-12
MAX_ITER = 500
POLISH_STEPS = 2


@dataclass(frozen=True)
class TridiagForm:
    g: np.ndarray
    g_left: float
    g_right: float
    q: np.ndarray
    m: np.ndarray

    @property
    def n(self) -> int:
        return self.m.size

    @property
    def diag(self) -> np.ndarray:
        d = self.q.astype(float).copy()
        d[:-1] += self.g
        d[1:] += self.g
        d[0] += self.g_left
        d[-1] += self.g_right
        return d

    @property
    def off(self) -> np.ndarray:
        return -self.g

    def apply(self, u: np.ndarray) -> np.ndarray:
        du = np.diff(u) * self.g
        out = self.q * u
        out[:-1] -= du
        out[1:] += du
        out[0] += self.g_left * u[0]
        out[-1] += self.g_right * u[-1]
        return out

    def quad(self, u: np.ndarray, v: np.ndarray | None = None) -> float:
        if v is None:
            v = u
        return float(np.sum(self.g * np.diff(u) * np.diff(v))
                     + self.g_left * u[0] * v[0] + self.g_right * u[-1] * v[-1]
                     + np.sum(self.q * u * v))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.sum(self.m * u * v))

    def rayleigh(self, u: np.ndarray) -> float:
        return self.quad(u) / self.inner(u, u)

    def standard(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of M^{-1/2} K M^{-1/2}."""
        s = np.sqrt(self.m)
        return self.diag / self.m, self.off / (s[:-1] * s[1:])

    def shifted_banded(self, sigma: float) -> np.ndarray:
        d, e = self.standard()
        ab = np.zeros((3, self.n))
        ab[0, 1:] = e
        ab[1] = d - sigma
        ab[2, :-1] = e
        return ab


def _bisection_estimates(form: TridiagForm, k: int) -> np.ndarray:
    d, e = form.standard()
    return eigh_tridiagonal(d, e, eigvals_only=True, select="i",
                            select_range=(0, k - 1))


def lowest_eigenpairs(form: TridiagForm, k: int, tol: float = RAYLEIGH_TOL,
                      max_iter: int = MAX_ITER):
    """First ``k`` eigenpairs by shifted inverse iteration with deflation.

    Shifts are placed just below each eigenvalue using LAPACK bisection
    estimates; each eigenvector is iterated from a deterministic start
    (all ones for the first), deflated against the converged ones in the
    M-inner product, and accepted when successive Rayleigh quotients agree
    to ``tol`` relative to the largest requested eigenvalue.

    Returns (lams, vecs) with vecs[j] M-orthonormal and vecs[0] > 0.
    """
    n = form.n
    if k < 1 or k > n:
        raise PreconditionError(f"cannot extract {k} eigenpairs from a size-{n} problem")
    est = _bisection_estimates(form, min(k + 1, n))
    sqm = np.sqrt(form.m)
    ys: list[np.ndarray] = []
    lams = np.empty(k)
    # spectral scale of the problem, so tolerances do not depend on units
    ref = float(np.max(np.abs(est))) or 1.0
    for j in range(k):
        gaps = [abs(est[j] - est[i]) for i in (j - 1, j + 1) if 0 <= i < est.size]
        gap = min(gaps) if gaps else ref
        sigma = est[j] - max(1e-3 * gap, 1e-9 * ref)
        ab = form.shifted_banded(sigma)
        if j == 0:
            y = sqm.copy()
        else:
            y = np.cos(np.arange(n) * (j + 0.5))
            y *= sqm
        for prev in ys:
            y -= (prev @ y) * prev
        y /= np.linalg.norm(y)
        rq_old = np.inf
        for _ in range(max_iter):
            y = solve_banded((1, 1), ab, y)
            for prev in ys:
                y -= (prev @ y) * prev
            y /= np.linalg.norm(y)
            rq = form.rayleigh(y / sqm)
            if abs(rq - rq_old) <= tol * max(ref, abs(rq)):
                break
            rq_old = rq
        else:
            raise ConvergenceError(
                f"inverse iteration for eigenpair {j + 1} did not converge in {max_iter} steps")
        # the Rayleigh quotient settles quadratically before the vector does
        for _ in range(POLISH_STEPS):
            y = solve_banded((1, 1), ab, y)
            for prev in ys:
                y -= (prev @ y) * prev
            y /= np.linalg.norm(y)
        rq = form.rayleigh(y / sqm)
        ys.append(y)
        lams[j] = rq
    vecs = np.array([y / sqm for y in ys])
    if vecs[0].sum() < 0:
        vecs[0] = -vecs[0]
    for j in range(1, k):
        # deterministic sign: first significant entry positive
        i = int(np.argmax(np.abs(vecs[j]) > 1e-8 * np.abs(vecs[j]).max()))
        if vecs[j][i] < 0:
            vecs[j] = -vecs[j]
    return lams, vecs


def principal_eigenpair(form: TridiagForm, tol: float = RAYLEIGH_TOL,
                        max_iter: int = MAX_ITER) -> tuple[float, np.ndarray]:
    lams, vecs = lowest_eigenpairs(form, 1, tol=tol, max_iter=max_iter)
    return float(lams[0]), vecs[0]
