"""Scalar root finding and step-size selection along the ellipse.

All candidate steps are expressed through ``s = sin(alpha)`` in ``[0, 1]``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np

from .kkt import ArcDerivatives
from .qp_core import Iterate, SolverOptions

BISECT_TOL = 1e-12
MAX_SIN = 1.0 - 1e-12


def cardano_root(p: float, q: float) -> float:
    """Unique real root of ``x^3 + p x + q = 0`` when the discriminant is positive."""
    half_q = 0.5 * q
    disc = half_q * half_q + (p / 3.0) ** 3
    if not disc > 0.0:
        raise ValueError(
            f"cubic x^3 + {p}x + {q} has discriminant {disc} <= 0"
        )
    # take the cube root of the larger-magnitude radicand; the other term
    # follows from u * v = -p/3 without cancellation
    u = float(np.cbrt(-half_q - math.copysign(math.sqrt(disc), half_q)))
    x = u - p / (3.0 * u)
    fx = x * x * x + p * x + q
    dfx = 3.0 * x * x + p
    if dfx > 0.0:
        x -= fx / dfx
    return x


def smallest_positive_root_monotone(
    f: Callable[[float], float], tol: float = BISECT_TOL
) -> float:
    """Bisection for the root of a nondecreasing ``f`` on ``[0, 1]``.

    Returns 1.0 when ``f(1) <= 0``.  Otherwise the lower end of the final
    bracket is returned, so ``f`` is nonpositive at the result and the
    bracket width is at most ``tol``.
    """
    f0 = f(0.0)
    if not f0 < 0.0:
        raise ValueError(f"expected f(0) < 0, got {f0}")
    if f(1.0) <= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _one_minus_cos(s: float) -> float:
    return s * s / (1.0 + math.sqrt(max(0.0, 1.0 - s * s)))


def alpha_bar(mu: float, ip_dd: float, n: int, sigma: float) -> float:
    """Positivity bound: root of ``mu(1-s) - ip_dd/(2n) (s^4 + s^2) = sigma``."""
    if not mu > sigma:
        raise ValueError(f"alpha_bar needs mu > sigma, got mu={mu}, sigma={sigma}")
    w = ip_dd / (2 * n)

    def g(s):
        s2 = s * s
        return -(mu * (1.0 - s) - w * (s2 * s2 + s2) - sigma)

    return smallest_positive_root_monotone(g)


@dataclasses.dataclass(frozen=True)
class QuarticCoeffs:
    """``a4 s^4 + a3 s^3 + a2 s^2 + a1 s + a0``."""

    a4: float
    a3: float
    a2: float
    a1: float
    a0: float

    def __call__(self, s: float) -> float:
        return (((self.a4 * s + self.a3) * s + self.a2) * s + self.a1) * s + self.a0


def _centered_norms(n: int, d: ArcDerivatives) -> tuple[float, float]:
    """Norms of the centred cross and curvature products."""
    pd, wd, pdd, wdd = d.pdot, d.wdot, d.pddot, d.wddot
    cross = pd * wdd + wd * pdd
    curv = pdd * wdd - wd * pd
    n_cross = np.linalg.norm(cross - (d.ip_dw2 + d.ip_d2w) / (2 * n))
    n_curv = np.linalg.norm(curv - (d.ip_dddd - d.ip_dd) / (2 * n))
    return float(n_cross), float(n_curv)


def neighborhood_coeffs(theta: float, mu: float, n: int, d: ArcDerivatives) -> QuarticCoeffs:
    n_cross, n_curv = _centered_norms(n, d)
    a2 = 2.0 * theta * d.ip_dd / (2 * n)
    return QuarticCoeffs(a4=n_curv + a2, a3=n_cross, a2=a2,
                         a1=theta * mu, a0=-theta * mu)


def alpha_tilde(coeffs: QuarticCoeffs) -> float:
    if not coeffs.a0 < 0.0:
        raise ValueError(f"quartic needs a0 < 0, got {coeffs.a0}")
    return smallest_positive_root_monotone(coeffs)


@dataclasses.dataclass(frozen=True)
class ArcCoeffs:
    """``b4 (1-cos)^2 + b3 sin (1-cos) + b1 sin + b0`` in terms of ``s = sin``."""

    b4: float
    b3: float
    b1: float
    b0: float

    def __call__(self, s: float) -> float:
        omc = _one_minus_cos(s)
        return (self.b4 * omc + self.b3 * s) * omc + self.b1 * s + self.b0

    def clamped(self) -> "ArcCoeffs":
        return ArcCoeffs(max(self.b4, 0.0), max(self.b3, 0.0), self.b1, self.b0)


def acute_coeffs(theta: float, mu: float, n: int, d: ArcDerivatives) -> ArcCoeffs:
    """Unclamped coefficients of the sharper proximity polynomial."""
    n_cross, n_curv = _centered_norms(n, d)
    b3 = n_cross + theta / n * (d.ip_dw2 + d.ip_d2w)
    b4 = n_curv - theta / n * (d.ip_dddd - d.ip_dd)
    return ArcCoeffs(b4=b4, b3=b3, b1=theta * mu, b0=-theta * mu)


def alpha_acute(theta: float, mu: float, n: int, d: ArcDerivatives) -> float:
    return smallest_positive_root_monotone(acute_coeffs(theta, mu, n, d).clamped())


def alpha_breve(mu: float, n: int, ip_dddd: float) -> float:
    """Minimiser over ``s`` of the upper bound on the next duality gap.

    With ``v = ip_dddd / (2 n mu)`` the bound is decreasing on the whole of
    ``[0, 1]`` when ``v <= 1/6``; otherwise its stationary point solves
    ``4 v s^3 + 2 v s - 1 = 0``.
    """
    if ip_dddd / (2 * n * mu) <= 1.0 / 6.0:
        return 1.0
    return cardano_root(0.5, -n * mu / (2.0 * ip_dddd))


def alpha_hat(mu: float, n: int, ip_dddd: float) -> float:
    """Largest ``sin(alpha)`` for which the gap bound guarantees ``mu(alpha) <= mu``.

    Used only for validation; the step rule uses :func:`alpha_breve`.
    """
    if ip_dddd / (n * mu) <= 1.0:
        return 1.0
    return cardano_root(1.0, -2.0 * n * mu / ip_dddd)


@dataclasses.dataclass(frozen=True)
class StepBudget:
    sin_bar: float
    sin_check: float
    sin_breve: float
    sin_alpha: float
    sin_tilde: float = float("nan")
    sin_acute: float = float("nan")


def select_step(theta: float, it: Iterate, d: ArcDerivatives, options: SolverOptions) -> StepBudget:
    """Adaptive step: the smallest of the positivity, proximity and gap bounds."""
    n = it.n
    mu = it.mu
    s_bar = alpha_bar(mu, d.ip_dd, n, options.sigma)
    s_tilde = alpha_tilde(neighborhood_coeffs(theta, mu, n, d))
    s_acute = alpha_acute(theta, mu, n, d)
    s_check = max(s_tilde, s_acute)
    s_breve = alpha_breve(mu, n, d.ip_dddd)
    s = min(s_bar, s_check, s_breve, MAX_SIN)
    return StepBudget(s_bar, s_check, s_breve, s, s_tilde, s_acute)
