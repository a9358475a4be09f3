"""Box-constrained QP data, iterates and central-path measures.

The problem is

    min  1/2 x^T H x + c^T x   s.t.  -e <= x <= e

with slacks ``y = e - x``, ``z = e + x`` and multipliers ``lam`` (for
``x <= e``) and ``gam`` (for ``-e <= x``).
"""

from __future__ import annotations

import dataclasses
import enum

import numpy as np
from scipy import linalg

SYMMETRY_TOL = 1e-12
DRIFT_TOL = 1e-10
MAX_THETA = 0.19


class ProblemError(ValueError):
    """Raised for malformed or non-convex problem data."""


class NumericalError(ArithmeticError):
    """Raised when an iterate loses interiority or a factorization fails."""


def check_spd(M: np.ndarray, name: str) -> None:
    """Validate that ``M`` is square, symmetric and positive definite."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ProblemError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ProblemError(f"{name} has non-finite entries")
    asym = np.abs(M - M.T)
    if asym.size and asym.max() > SYMMETRY_TOL:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ProblemError(
            f"{name} is not symmetric: {name}[{i},{j}]={M[i, j]!r} vs "
            f"{name}[{j},{i}]={M[j, i]!r}"
        )
    try:
        linalg.cholesky(M, lower=True)
    except linalg.LinAlgError as exc:
        raise ProblemError(f"{name} is not positive definite") from exc


@dataclasses.dataclass(frozen=True, eq=False)
class BoxQP:
    """Convex QP over the unit box, ``min 1/2 x'Hx + c'x`` with ``|x_i| <= 1``."""

    H: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        H = np.array(self.H, dtype=np.float64)
        c = np.array(self.c, dtype=np.float64).reshape(-1)
        if H.ndim != 2 or H.shape != (c.size, c.size):
            raise ProblemError(
                f"H must have shape ({c.size}, {c.size}), got {H.shape}"
            )
        if c.size == 0:
            raise ProblemError("problem dimension must be positive")
        if not np.all(np.isfinite(c)):
            raise ProblemError("c has non-finite entries")
        check_spd(H, "H")
        H.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.c.size

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.H @ x + self.c @ x)


@dataclasses.dataclass
class Iterate:
    """A point ``(x, y, z, lam, gam)`` together with its duality gap.

    ``y`` and ``z`` are stored independently of ``x`` so that drift from
    ``x + y = e`` and ``x - z = -e`` stays observable.  ``mu`` is filled in
    from the vectors when not given.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    gam: np.ndarray
    mu: float | None = None

    def __post_init__(self):
        n = len(self.x)
        for name in ("y", "z", "lam", "gam"):
            if len(getattr(self, name)) != n:
                raise ValueError(
                    f"iterate vector {name} has length "
                    f"{len(getattr(self, name))}, expected {n}"
                )
        if self.mu is None:
            self.mu = duality_gap(self)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def p(self) -> np.ndarray:
        return np.concatenate([self.y, self.z])

    @property
    def omega(self) -> np.ndarray:
        return np.concatenate([self.lam, self.gam])

    def is_interior(self, floor: float = 0.0) -> bool:
        return bool(
            min(self.y.min(), self.z.min(), self.lam.min(), self.gam.min())
            > floor
        )

    def drift(self) -> float:
        """Max-norm violation of ``x + y = e`` and ``x - z = -e``."""
        return float(
            max(np.abs(self.x + self.y - 1.0).max(),
                np.abs(self.x - self.z + 1.0).max())
        )

    def copy(self) -> "Iterate":
        return Iterate(self.x.copy(), self.y.copy(), self.z.copy(),
                       self.lam.copy(), self.gam.copy(), self.mu)


class Mode(enum.Enum):
    THEORETICAL = "theoretical"
    PRACTICAL = "practical"


@dataclasses.dataclass(frozen=True)
class SolverOptions:
    """Solver parameters.

    Attributes:
      theta: Radius of the central-path neighborhood, in ``(0, 0.19]``.
      eps: Termination tolerance on the composite measure ``kappa``.
      sigma: Positive floor for the duality gap along the arc; must satisfy
        ``0 < sigma < eps``.
      max_iter: Iteration cap.
      mode: ``Mode.PRACTICAL`` (adaptive steps) or ``Mode.THEORETICAL``
        (fixed ``sin(alpha) = theta / sqrt(n)``).
    """

    theta: float = MAX_THETA
    eps: float = 1e-8
    sigma: float = 1e-10
    max_iter: int = 200
    mode: Mode = Mode.PRACTICAL

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode))
        if not 0.0 < self.theta <= MAX_THETA:
            raise ValueError(f"theta must lie in (0, {MAX_THETA}], got {self.theta}")
        if not self.eps > self.sigma > 0.0:
            raise ValueError(
                f"need eps > sigma > 0, got eps={self.eps}, sigma={self.sigma}"
            )
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")


def duality_gap(it: Iterate) -> float:
    """``(lam'y + gam'z) / 2n``."""
    n = len(it.x)
    if not (len(it.y) == len(it.z) == len(it.lam) == len(it.gam) == n):
        raise ValueError("iterate vectors have inconsistent lengths")
    return float((it.lam @ it.y + it.gam @ it.z) / (2 * n))


def proximity(it: Iterate) -> float:
    """Relative distance ``||p o omega - mu e|| / mu`` to the central path.

    The gap is recomputed from the vectors rather than read from ``it.mu``.
    """
    mu = duality_gap(it)
    if not mu > 0.0:
        raise ValueError(f"proximity undefined for mu={mu}")
    comp = np.concatenate([it.y * it.lam, it.z * it.gam])
    return float(np.linalg.norm(comp - mu) / mu)


def in_neighborhood(it: Iterate, theta: float) -> bool:
    """Membership in N2(theta), ignoring the equality residuals."""
    return it.is_interior() and proximity(it) <= theta


def residuals(qp: BoxQP, it: Iterate) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(r_X, r_Y, r_Z)`` = ``(Hx + lam - gam + c, x + y - e, x - z + e)``."""
    if it.n != qp.n:
        raise ValueError(f"iterate has dimension {it.n}, problem has {qp.n}")
    r_x = qp.H @ it.x + it.lam - it.gam + qp.c
    r_y = it.x + it.y - 1.0
    r_z = it.x - it.z + 1.0
    return r_x, r_y, r_z


def kappa(qp: BoxQP, it: Iterate) -> float:
    """Composite termination measure combining residuals and scaled gap.

    The gap is scaled by ``max(1, |x'Hx + c'x|)``; note the quadratic term
    carries no factor 1/2 here.
    """
    r_x, r_y, r_z = residuals(qp, it)
    n = qp.n
    obj = float(it.x @ qp.H @ it.x + qp.c @ it.x)
    return float(
        (np.linalg.norm(r_y) + np.linalg.norm(r_z)) / (2 * n)
        + np.linalg.norm(r_x) / max(1.0, float(np.linalg.norm(qp.c)))
        + it.mu / max(1.0, abs(obj))
    )


def initial_point(qp: BoxQP) -> Iterate:
    """Explicit strictly feasible starting point inside N2(0.19).

    ``x = 0``, ``y = z = e`` and ``lam, gam = 4(1 + ||c||^2) -/+ c/2``, so
    that ``Hx + c + lam - gam = 0`` and ``mu = 4(1 + ||c||^2)``.
    """
    n = qp.n
    level = 4.0 * (1.0 + float(qp.c @ qp.c))
    ones = np.ones(n)
    return Iterate(
        x=np.zeros(n),
        y=ones.copy(),
        z=ones.copy(),
        lam=level - 0.5 * qp.c,
        gam=level + 0.5 * qp.c,
        mu=level,
    )
