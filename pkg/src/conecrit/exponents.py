"""Characteristic roots of alpha (alpha + N - 2) = lambda and the critical exponent.

A homogeneous function r^alpha phi(omega) with -Delta_omega phi = lambda phi
is harmonic exactly when alpha solves the quadratic above.  The negative
root controls the decay of minimal positive solutions, and

    p* = 1 - 2 / alpha_minus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PreconditionError, SpectralFloorError, SubcriticalError


def hardy_floor(N: int) -> float:
    return -((N - 2) ** 2) / 4.0


@dataclass(frozen=True)
class CharacteristicRoots:
    alpha_minus: float
    alpha_plus: float
    lam: float
    N: int

    def residuals(self) -> tuple[float, float]:
        f = lambda a: a * (a + self.N - 2) - self.lam
        return f(self.alpha_minus), f(self.alpha_plus)


def characteristic_roots(lam: float, N: int) -> CharacteristicRoots:
    """Both real roots, the negative one computed first to avoid cancellation."""
    if int(N) != N or N < 3:
        raise PreconditionError(f"dimension must be an integer >= 3, got {N}")
    disc = (N - 2) ** 2 / 4.0 + lam
    if not disc > 0.0:
        raise SpectralFloorError(f"lambda={lam} is at or below the floor {hardy_floor(N)}")
    am = -(N - 2) / 2.0 - math.sqrt(disc)
    ap = -lam / am
    if ap == 0.0:
        ap = 0.0  # drop the sign of a negative zero
    return CharacteristicRoots(am, ap, float(lam), int(N))


def critical_exponent_from_alpha(alpha: float) -> float:
    if not alpha < 0.0:
        raise PreconditionError(f"exponent must be negative, got {alpha}")
    return 1.0 - 2.0 / alpha


def alpha_for_exponent(p: float) -> float:
    """The homogeneity beta = 2 / (1 - p) of a power supersolution; beta * p = beta - 2."""
    if not p > 1.0:
        raise PreconditionError(f"need p > 1, got {p}")
    return 2.0 / (1.0 - p)


@dataclass(frozen=True)
class ExponentReport:
    lambda1: float
    alpha_minus: float
    alpha_plus: float
    p_star: float
    domain: dict | None = None
    diagnostics: dict | None = None

    def to_json(self) -> dict:
        out = {"lambda1": self.lambda1, "alpha_minus": self.alpha_minus,
               "alpha_plus": self.alpha_plus, "p_star": self.p_star, "domain": self.domain}
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def critical_exponent(roots: CharacteristicRoots, domain: dict | None = None,
                      diagnostics: dict | None = None) -> ExponentReport:
    p = critical_exponent_from_alpha(roots.alpha_minus)
    return ExponentReport(roots.lam, roots.alpha_minus, roots.alpha_plus, p, domain, diagnostics)


def exponent_gap(lambda1: float, N: int, p: float) -> float:
    """lambda1 - beta (beta + N - 2) with beta = 2 / (1 - p)."""
    b = alpha_for_exponent(p)
    return lambda1 - b * (b + N - 2)


def supersolution_amplitude(p: float, lambda1: float, N: int, phi1_sup: float) -> float:
    """Largest c such that c r^beta phi_1 is a supersolution of -Delta u = u^p.

    With phi_1 normalized so that max phi_1 = phi1_sup the condition reads
    (c phi1_sup)^(p-1) <= lambda1 - beta (beta + N - 2).
    """
    if not phi1_sup > 0.0:
        raise PreconditionError("phi1_sup must be positive")
    g = exponent_gap(lambda1, N, p)
    if not g > 0.0:
        raise SubcriticalError(f"p={p} is not above the critical exponent (gap {g:.3e})")
    return g ** (1.0 / (p - 1.0)) / phi1_sup
