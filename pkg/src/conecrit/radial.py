"""Radial part of L_d v = 0 for v = R(r) phi_1(omega).

With t = log r the radial equation R'' + (N-1)/r R' - d(r)/r^2 R = 0 becomes

    y'' + (N-2) y' - d(t) y = 0,

and the local exponent e = y'/y = r R'/R obeys the Riccati equation

    e' = d - (N-2) e - e^2.

For frozen d the Riccati fixed points are the characteristic roots; the
negative one attracts backwards in t, the positive one forwards.  The
decaying (minimal) branch is therefore integrated backwards from far out
and the growing branch forwards, and a solution of an initial value
problem is assembled as a combination of the two.  Neither integration
ever has to follow a dominated solution, so no renormalization is needed
and overflow is avoided by carrying log|R|.

Coefficients are functions of t; the loglog r of the galleries is log t.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, NeverEllipticError, PreconditionError
from .exponents import characteristic_roots

RTOL = 1e-10
ATOL = 1e-13
SNAP_TOL = 1e-7
ADMISSIBILITY_SLACK = 1e-12


class RadialCoefficient:
    """Base class: ``d(t)`` as a function of t = log r, for dimension ``N``."""

    N: int
    min_radius: float = 0.0
    name: str = "coefficient"

    def d(self, t):
        raise NotImplementedError

    def has_closed_form(self) -> bool:
        return False

    def closed_form(self, t):
        """(log R, local exponent) of the gallery's explicit minimal solution."""
        raise PreconditionError(f"{self.name} coefficient has no closed-form solution")

    def log_increment(self, t, s):
        """log R(t + s) - log R(t) for the closed form, without cancellation."""
        a, _ = self.closed_form(t + s)
        b, _ = self.closed_form(t)
        return a - b

    def d_at_radius(self, r):
        return self.d(np.log(np.asarray(r, dtype=float)))

    def params(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"name": self.name, "N": self.N, **self.params()}


def _check_N(N):
    if int(N) != N or N < 3:
        raise PreconditionError(f"dimension must be an integer >= 3, got {N}")
    return int(N)


@dataclass(frozen=True)
class Constant(RadialCoefficient):
    alpha: float
    N: int = 3
    name = "const"

    def __post_init__(self):
        object.__setattr__(self, "N", _check_N(self.N))
        if not self.alpha < 2 - self.N:
            raise PreconditionError(f"need alpha < 2 - N = {2 - self.N}, got {self.alpha}")

    @property
    def value(self) -> float:
        return self.alpha * (self.alpha + self.N - 2)

    def d(self, t):
        return np.full(np.shape(t), self.value) if np.ndim(t) else self.value

    def has_closed_form(self):
        return True

    def closed_form(self, t):
        t = np.asarray(t, dtype=float)
        return self.alpha * t, np.full(t.shape, float(self.alpha))

    def log_increment(self, t, s):
        return self.alpha * np.broadcast_to(s, np.broadcast(t, s).shape)

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class LogCorrected(RadialCoefficient):
    """d(t) = alpha (alpha + N - 2) + (2 - N - 2 alpha)/t + 2/t^2, solved by r^alpha / log r."""

    alpha: float
    N: int = 3
    name = "log"
    min_radius = 1.0

    def __post_init__(self):
        object.__setattr__(self, "N", _check_N(self.N))
        if not self.alpha < 2 - self.N:
            raise PreconditionError(f"need alpha < 2 - N = {2 - self.N}, got {self.alpha}")

    @property
    def limit(self) -> float:
        return self.alpha * (self.alpha + self.N - 2)

    def d(self, t):
        t = np.asarray(t, dtype=float)
        a, N = self.alpha, self.N
        return a * (a + N - 2) + (2 - N - 2 * a) / t + 2.0 / t**2

    def has_closed_form(self):
        return True

    def closed_form(self, t):
        t = np.asarray(t, dtype=float)
        return self.alpha * t - np.log(t), self.alpha - 1.0 / t

    def log_increment(self, t, s):
        return self.alpha * s - np.log1p(s / t)

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class Oscillating(RadialCoefficient):
    """d = A (A + N - 2) + A' with A = gamma + delta (sin(k log t) + k cos(k log t)).

    The minimal solution r^(gamma + delta sin(k log t)) has local exponent A,
    which swings between gamma -+ delta sqrt(1 + k^2).
    """

    gamma: float
    delta: float
    k: float
    N: int = 3
    name = "osc"
    min_radius = 1.0

    def __post_init__(self):
        object.__setattr__(self, "N", _check_N(self.N))
        if not (self.delta > 0 and self.k > 0):
            raise PreconditionError("need delta > 0 and k > 0")
        top = self.gamma + self.delta * math.sqrt(self.k**2 + 1)
        if not top < 2 - self.N - ADMISSIBILITY_SLACK:
            raise PreconditionError(
                f"gamma + delta sqrt(k^2+1) = {top} must be below 2 - N = {2 - self.N}")

    @property
    def swing(self) -> float:
        return self.delta * math.sqrt(1 + self.k**2)

    def A(self, t):
        L = np.log(np.asarray(t, dtype=float))
        return self.gamma + self.delta * (np.sin(self.k * L) + self.k * np.cos(self.k * L))

    def dA(self, t):
        t = np.asarray(t, dtype=float)
        L = np.log(t)
        k = self.k
        return k * self.delta * (np.cos(k * L) - k * np.sin(k * L)) / t

    def d(self, t):
        A = self.A(t)
        return A * (A + self.N - 2) + self.dA(t)

    def has_closed_form(self):
        return True

    def closed_form(self, t):
        t = np.asarray(t, dtype=float)
        return t * (self.gamma + self.delta * np.sin(self.k * np.log(t))), self.A(t)

    def log_increment(self, t, s):
        k, dl = self.k, np.log1p(s / t)
        L0 = np.log(t)
        L1 = L0 + dl
        dsin = 2.0 * np.cos(0.5 * k * (L0 + L1)) * np.sin(0.5 * k * dl)
        return s * (self.gamma + self.delta * np.sin(k * L1)) + t * self.delta * dsin

    def params(self):
        return {"gamma": self.gamma, "delta": self.delta, "k": self.k}


@dataclass(frozen=True)
class Tabulated(RadialCoefficient):
    """Samples of d(r), linearly interpolated in log r and held constant outside."""

    radii: tuple
    values: tuple
    N: int = 3
    name = "table"

    def __post_init__(self):
        object.__setattr__(self, "N", _check_N(self.N))
        r = np.asarray(self.radii, dtype=float)
        if r.ndim != 1 or r.size < 2 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise PreconditionError("tabulated radii must be positive and strictly increasing")
        if len(self.values) != r.size or not np.all(np.isfinite(self.values)):
            raise PreconditionError("need one finite value per radius")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    def d(self, t):
        return np.interp(t, np.log(self.radii), self.values)

    def params(self):
        return {"radii": list(self.radii), "values": list(self.values)}


# ----------------------------------------------------------------------------
# ellipticity


def ellipticity_window(coeff: RadialCoefficient, lambda1: float, r_min: float = 3.0,
                       t_max: float = 1e8, samples: int = 20000) -> tuple[float, float]:
    """(R0, nu) with d(r)/lambda1 in [1/nu, nu] for r >= R0.

    The ratio is scanned on a grid uniform in log t out to t = ``t_max``.  The
    far-field window is read off the outer half of the scan; R0 is the
    smallest scanned radius beyond which the ratio stays within twice that
    window, and nu is the window actually observed beyond R0.
    """
    if not lambda1 > 0:
        raise PreconditionError("the L_d construction needs lambda1 > 0")
    r_min = max(r_min, coeff.min_radius)
    if isinstance(coeff, Constant):
        q = coeff.value / lambda1
        if not q > 0:
            raise NeverEllipticError("d / lambda1 is not positive")
        return r_min, max(q, 1.0 / q, 1.0)
    t = np.geomspace(math.log(r_min), t_max, samples)
    q = np.asarray(coeff.d(t), dtype=float) / lambda1
    far = q[samples // 2:]
    if not np.all(far > 0):
        raise NeverEllipticError("d / lambda1 changes sign arbitrarily far out")
    nu_far = max(far.max(), 1.0 / far.min(), 1.0)
    bad = (q <= 0) | (q > 2 * nu_far) | (q < 1.0 / (2 * nu_far))
    start = int(np.nonzero(bad)[0][-1]) + 1 if bad.any() else 0
    tail = q[start:]
    nu = max(tail.max(), 1.0 / tail.min(), 1.0)
    return float(math.exp(t[start])), float(nu)


# ----------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class RadialProfile:
    """Radial solution on a log grid, stored as t = log r, log|R|, sign(R) and e = r R'/R."""

    t: np.ndarray = field(repr=False)
    log_abs: np.ndarray = field(repr=False)
    sign: np.ndarray = field(repr=False)
    e: np.ndarray = field(repr=False)
    diagnostics: dict = field(default_factory=dict)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.t)

    @property
    def R(self) -> np.ndarray:
        return self.sign * np.exp(self.log_abs)

    @property
    def dR(self) -> np.ndarray:
        return self.R * self.e / self.r

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "R", "e"])
        for r, R, e in zip(self.r, self.R, self.e):
            w.writerow([repr(float(r)), repr(float(R)), repr(float(e))])
        return buf.getvalue()


def _riccati(coeff: RadialCoefficient):
    N = coeff.N

    def rhs(t, s):
        e = s[0]
        return [coeff.d(t) - (N - 2) * e - e * e, e]

    return rhs


def _frozen_roots(coeff: RadialCoefficient, t: float):
    return characteristic_roots(float(coeff.d(t)), coeff.N)


def _branch(coeff, t_from, t_to, e_start, t_eval):
    sol = solve_ivp(_riccati(coeff), (t_from, t_to), [e_start, 0.0], method="DOP853",
                    rtol=RTOL, atol=ATOL, t_eval=t_eval)
    if sol.status != 0:
        raise ConvergenceError(f"Riccati integration failed: {sol.message}")
    return sol.y[0], sol.y[1]


def decaying_branch(coeff: RadialCoefficient, t: np.ndarray):
    """Local exponent and log-amplitude (zero at t[0]) of the minimal solution on grid t."""
    t_end = float(t[-1])
    roots = _frozen_roots(coeff, t_end)
    gap = roots.alpha_plus - roots.alpha_minus
    # backward attraction shrinks the start error by exp(-gap * dt)
    t_far = t_end + 32.0 / gap
    e, logy = _branch(coeff, t_far, float(t[0]), _frozen_roots(coeff, t_far).alpha_minus,
                      np.concatenate([[t_far], t[::-1]]) if t_far > t_end else t[::-1])
    e, logy = e[::-1][: t.size], logy[::-1][: t.size]
    return e, logy - logy[0]


def growing_branch(coeff: RadialCoefficient, t: np.ndarray):
    """A dominant solution started on the frozen positive root at t[0]."""
    e, logy = _branch(coeff, float(t[0]), float(t[-1]),
                      _frozen_roots(coeff, float(t[0])).alpha_plus, t)
    return e, logy


def integrate_radial(coeff: RadialCoefficient, N: int, r0: float, r1: float,
                     init: tuple[float, float], per_decade: int = 200) -> RadialProfile:
    """Solve the radial equation from R(r0), R'(r0) and sample it on a log grid.

    The solution is written as a D + b G with D the decaying and G a growing
    branch.  If the growing component is below ``SNAP_TOL`` relative to the
    data (initial data taken from the minimal solution up to round-off) it is
    dropped and its size is recorded in the diagnostics.
    """
    if N != coeff.N:
        raise PreconditionError(f"coefficient was built for N={coeff.N}, not {N}")
    if not (r0 > coeff.min_radius and r1 > r0):
        raise PreconditionError(
            f"need {coeff.min_radius} < r0 < r1 for this coefficient, got r0={r0}, r1={r1}")
    R0, dR0 = map(float, init)
    if R0 == 0.0 and dR0 == 0.0:
        raise PreconditionError("initial data must not both vanish")
    n = max(2, int(math.ceil(per_decade * math.log10(r1 / r0))) + 1)
    t = np.linspace(math.log(r0), math.log(r1), n)
    eD, lD = decaying_branch(coeff, t)
    eG, lG = growing_branch(coeff, t)
    # y = a D + b G with D(t0) = G(t0) = 1, y'(t0) = r0 R'(r0)
    yd = r0 * dR0
    b = (yd - eD[0] * R0) / (eG[0] - eD[0])
    a = R0 - b
    growing_share = abs(b) / (abs(a) + abs(b))
    snapped = 0.0
    if a != 0.0 and growing_share < SNAP_TOL:
        snapped, b = growing_share, 0.0
    with np.errstate(over="ignore", divide="ignore"):
        # combine in log space: y = a D + b G
        if b == 0.0:
            log_abs, sign, e = math.log(abs(a)) + lD, np.full(n, math.copysign(1.0, a)), eD
        elif a == 0.0:
            log_abs, sign, e = math.log(abs(b)) + lG, np.full(n, math.copysign(1.0, b)), eG
        else:
            la, lb = math.log(abs(a)) + lD, math.log(abs(b)) + lG
            m = np.maximum(la, lb)
            pa, pb = math.copysign(1.0, a) * np.exp(la - m), math.copysign(1.0, b) * np.exp(lb - m)
            s = pa + pb
            sign = np.sign(s)
            log_abs = m + np.log(np.abs(s))
            e = (pa * eD + pb * eG) / s
    diag = {"growing_share": growing_share, "snapped": snapped, "a": a, "b": b,
            "rtol": RTOL, "per_decade": per_decade}
    return RadialProfile(t, log_abs, sign, e, diag)


def local_exponent(profile: RadialProfile) -> np.ndarray:
    if np.any(profile.sign <= 0) or not np.all(np.isfinite(profile.log_abs)):
        raise PreconditionError("profile must be positive on its grid")
    return profile.e.copy()


def closed_form_profile(coeff: RadialCoefficient, r0: float, r1: float,
                        per_decade: int = 200) -> RadialProfile:
    n = max(2, int(math.ceil(per_decade * math.log10(r1 / r0))) + 1)
    t = np.linspace(math.log(r0), math.log(r1), n)
    logR, e = coeff.closed_form(t)
    return RadialProfile(t, logR, np.ones(n), e, {"closed_form": True})


# sixth-order central stencils
_D1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
_D2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0


def closed_form_residual(coeff: RadialCoefficient, N: int, grid) -> float:
    """max |L R| r^2 / (|d| R) for the gallery's closed form on a log-uniform grid.

    Derivatives in t are sixth-order central differences with the grid step;
    values are taken relative to R at the stencil center to stay scale free.
    """
    if N != coeff.N:
        raise PreconditionError(f"coefficient was built for N={coeff.N}, not {N}")
    if not coeff.has_closed_form():
        raise PreconditionError(f"{coeff.name} coefficient has no closed form")
    t = np.log(np.asarray(grid, dtype=float))
    if t.size < 2:
        raise PreconditionError("need at least two grid radii")
    h = (t[-1] - t[0]) / (t.size - 1)
    if not np.allclose(np.diff(t), h, rtol=1e-6, atol=0):
        raise PreconditionError("grid must be uniform in log r")
    offs = np.arange(-3, 4)
    if coeff.min_radius > 0 and t[0] - 3 * h <= math.log(coeff.min_radius):
        raise PreconditionError("stencil reaches below the coefficient's minimum radius")
    y = np.exp(coeff.log_increment(t[:, None], h * offs[None, :]))
    yt = y @ _D1 / h
    ytt = y @ _D2 / h**2
    d = np.asarray(coeff.d(t), dtype=float)
    res = np.abs(ytt + (N - 2) * yt - d) / np.abs(d)
    return float(res.max())
