"""Derivative, arc and corrector computations.

Every 5n x 5n system of the method has the block form

    [ H  0   0   I  -I ] [dx]   [0 ]
    [ I  I   0   0   0 ] [dy]   [0 ]
    [ I  0  -I   0   0 ] [dz] = [0 ]
    [ 0  Lam 0   Y   0 ] [dl]   [r1]
    [ 0  0  Gam  0   Z ] [dg]   [r2]

and is reduced to one SPD solve with ``M = H + diag(lam/y) + diag(gam/z)``:
``M dx = r2/z - r1/y``, then ``dy = -dx``, ``dz = dx``,
``dl = r1/y + (lam/y) dx`` and ``dg = r2/z - (gam/z) dx``.  The first
three block rows may also carry a nonzero right-hand side, which the
corrector uses to cancel round-off in the linear feasibility residuals.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy import linalg

from .qp_core import BoxQP, Iterate, NumericalError, duality_gap, residuals

MIN_ENTRY = 1e-14


@dataclasses.dataclass(frozen=True, eq=False)
class KktFactor:
    """Cholesky factor of ``M = H + diag(lam/y) + diag(gam/z)`` at one iterate."""

    chol: tuple
    lam_over_y: np.ndarray
    gam_over_z: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def n(self) -> int:
        return self.y.size

    def solve(self, b: np.ndarray) -> np.ndarray:
        return linalg.cho_solve(self.chol, b)

    def reduced_solve(self, r1: np.ndarray, r2: np.ndarray, b0=None, b1=None, b2=None):
        """Solve the block system for right-hand side ``(b0, b1, b2, r1, r2)``.

        Omitted ``b0, b1, b2`` are zero.
        """
        r1y = r1 / self.y
        r2z = r2 / self.z
        if b0 is None and b1 is None and b2 is None:
            dx = self.solve(r2z - r1y)
            dl = r1y + self.lam_over_y * dx
            dg = r2z - self.gam_over_z * dx
            return dx, -dx, dx.copy(), dl, dg
        zero = np.zeros_like(r1)
        b0 = zero if b0 is None else b0
        b1 = zero if b1 is None else b1
        b2 = zero if b2 is None else b2
        dx = self.solve(b0 + r2z - r1y + self.lam_over_y * b1 + self.gam_over_z * b2)
        dl = r1y + self.lam_over_y * (dx - b1)
        dg = r2z - self.gam_over_z * (dx - b2)
        return dx, b1 - dx, dx - b2, dl, dg


@dataclasses.dataclass(frozen=True)
class FirstDerivatives:
    xdot: np.ndarray
    ydot: np.ndarray
    zdot: np.ndarray
    ldot: np.ndarray
    gdot: np.ndarray

    @property
    def pdot(self) -> np.ndarray:
        return np.concatenate([self.ydot, self.zdot])

    @property
    def wdot(self) -> np.ndarray:
        return np.concatenate([self.ldot, self.gdot])


@dataclasses.dataclass(frozen=True)
class ArcDerivatives(FirstDerivatives):
    """First and second derivatives of the ellipse with cached inner products.

    ``ip_dd = pdot'wdot``, ``ip_dddd = pddot'wddot``, ``ip_dw2 = pdot'wddot``
    and ``ip_d2w = pddot'wdot``; all are computed from the vectors.
    """

    xddot: np.ndarray
    yddot: np.ndarray
    zddot: np.ndarray
    lddot: np.ndarray
    gddot: np.ndarray
    ip_dd: float
    ip_dddd: float
    ip_dw2: float
    ip_d2w: float

    @property
    def pddot(self) -> np.ndarray:
        return np.concatenate([self.yddot, self.zddot])

    @property
    def wddot(self) -> np.ndarray:
        return np.concatenate([self.lddot, self.gddot])


def _guard_interior(it: Iterate) -> None:
    smallest = min(it.y.min(), it.z.min(), it.lam.min(), it.gam.min())
    if not smallest > MIN_ENTRY:
        raise NumericalError(
            f"iterate is not strictly interior (smallest entry {smallest:.3e})"
        )


def factorize(qp: BoxQP, it: Iterate) -> KktFactor:
    _guard_interior(it)
    lam_over_y = it.lam / it.y
    gam_over_z = it.gam / it.z
    M = qp.H + np.diag(lam_over_y + gam_over_z)
    try:
        chol = linalg.cho_factor(M, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"factorization of the reduced KKT matrix failed: {exc}") from exc
    return KktFactor(chol, lam_over_y, gam_over_z, it.y, it.z)


def first_derivatives(qp: BoxQP, it: Iterate, f: KktFactor) -> FirstDerivatives:
    """Tangent of the central path: right-hand side ``(lam o y, gam o z)``."""
    return FirstDerivatives(*f.reduced_solve(it.lam * it.y, it.gam * it.z))


def second_derivatives(
    qp: BoxQP, it: Iterate, f: KktFactor, d1: FirstDerivatives
) -> ArcDerivatives:
    """Curvature of the central path: right-hand side ``-2 ldot o ydot``, ``-2 gdot o zdot``."""
    xdd, ydd, zdd, ldd, gdd = f.reduced_solve(
        -2.0 * d1.ldot * d1.ydot, -2.0 * d1.gdot * d1.zdot
    )
    ip_dd = float(d1.ydot @ d1.ldot + d1.zdot @ d1.gdot)
    ip_dddd = float(ydd @ ldd + zdd @ gdd)
    ip_dw2 = float(d1.ydot @ ldd + d1.zdot @ gdd)
    ip_d2w = float(ydd @ d1.ldot + zdd @ d1.gdot)
    return ArcDerivatives(
        d1.xdot, d1.ydot, d1.zdot, d1.ldot, d1.gdot,
        xdd, ydd, zdd, ldd, gdd,
        ip_dd, ip_dddd, ip_dw2, ip_d2w,
    )


def derivatives(qp: BoxQP, it: Iterate, f: KktFactor | None = None) -> ArcDerivatives:
    """Both derivative solves sharing one factorization."""
    if f is None:
        f = factorize(qp, it)
    return second_derivatives(qp, it, f, first_derivatives(qp, it, f))


def _one_minus_cos(sin_alpha: float) -> float:
    # 1 - sqrt(1 - s^2) written to avoid cancellation for small s
    s2 = sin_alpha * sin_alpha
    return s2 / (1.0 + math.sqrt(max(0.0, 1.0 - s2)))


def mu_alpha(it: Iterate, d: ArcDerivatives, sin_alpha: float) -> float:
    """Closed-form duality gap along the ellipse at angle ``asin(sin_alpha)``."""
    s = sin_alpha
    omc = _one_minus_cos(s)
    n = it.n
    return float(
        it.mu * (1.0 - s)
        + ((d.ip_dddd - d.ip_dd) * omc * omc - (d.ip_dw2 + d.ip_d2w) * s * omc)
        / (2 * n)
    )


def arc_point(it: Iterate, d: ArcDerivatives, sin_alpha: float) -> Iterate:
    """Point ``v - vdot sin(alpha) + vddot (1 - cos(alpha))`` on the ellipse.

    The angle is passed through its sine; ``alpha`` lies in ``[0, pi/2]``.
    Positivity is left to the caller.
    """
    if not 0.0 <= sin_alpha <= 1.0:
        raise ValueError(f"sin(alpha) must lie in [0, 1], got {sin_alpha}")
    s = sin_alpha
    omc = _one_minus_cos(s)
    return Iterate(
        x=it.x - s * d.xdot + omc * d.xddot,
        y=it.y - s * d.ydot + omc * d.yddot,
        z=it.z - s * d.zdot + omc * d.zddot,
        lam=it.lam - s * d.ldot + omc * d.lddot,
        gam=it.gam - s * d.gdot + omc * d.gddot,
        mu=mu_alpha(it, d, s),
    )


@dataclasses.dataclass(frozen=True)
class Correction:
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray
    dl: np.ndarray
    dg: np.ndarray

    @property
    def dp(self) -> np.ndarray:
        return np.concatenate([self.dy, self.dz])

    @property
    def dw(self) -> np.ndarray:
        return np.concatenate([self.dl, self.dg])

    def apply(self, it: Iterate) -> Iterate:
        """Add the correction; the gap is recomputed from the inner product."""
        return Iterate(it.x + self.dx, it.y + self.dy, it.z + self.dz,
                       it.lam + self.dl, it.gam + self.dg)


def corrector_direction(qp: BoxQP, cand: Iterate, restore_feasibility: bool = False) -> Correction:
    """Newton step from ``cand`` towards the centre with the same gap.

    The target gap is taken from the vectors of ``cand`` so that
    ``p'dw + w'dp = 0`` holds to round-off.  With ``restore_feasibility``
    the first three block rows carry ``-(r_X, r_Y, r_Z)``, which are zero in
    exact arithmetic; this keeps accumulated round-off from stalling the
    termination test when the multipliers start out very large.
    """
    f = factorize(qp, cand)
    mu = duality_gap(cand)
    r1 = mu - cand.lam * cand.y
    r2 = mu - cand.gam * cand.z
    if not restore_feasibility:
        return Correction(*f.reduced_solve(r1, r2))
    r_x, r_y, r_z = residuals(qp, cand)
    return Correction(*f.reduced_solve(r1, r2, -r_x, -r_y, -r_z))
