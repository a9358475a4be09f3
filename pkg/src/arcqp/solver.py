"""Arc-search path-following iterations for the box-constrained QP."""

from __future__ import annotations

import dataclasses
import enum
import logging
import math

import numpy as np

from . import kkt, step
from .qp_core import (
    BoxQP,
    Iterate,
    Mode,
    NumericalError,
    SolverOptions,
    initial_point,
    kappa,
    proximity,
    residuals,
)

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER_REACHED = "max_iter_reached"
    MU_BELOW_SIGMA = "mu_below_sigma"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclasses.dataclass(frozen=True)
class IterationRecord:
    """One completed iteration; ``mu`` and ``kappa`` refer to the new iterate."""

    k: int
    mu: float
    sin_alpha: float
    kappa: float
    r_x: float
    r_y: float
    r_z: float
    proximity_before: float
    proximity_after: float
    mu_arc: float = float("nan")
    drift: float = 0.0

    @property
    def r_norms(self) -> tuple[float, float, float]:
        return self.r_x, self.r_y, self.r_z


@dataclasses.dataclass
class SolveReport:
    status: SolveStatus
    final: Iterate
    iterations: list[IterationRecord]
    objective: float
    mu0: float = float("nan")
    message: str = ""

    @property
    def x(self) -> np.ndarray:
        return self.final.x

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    @property
    def n_iter(self) -> int:
        return len(self.iterations)


def _take_step(qp: BoxQP, it: Iterate, d: kkt.ArcDerivatives, sin_alpha: float):
    """Arc step followed by the centring correction.

    The step is halved while either the arc point or the corrected point
    fails strict positivity.
    """
    s = sin_alpha
    for _ in range(MAX_HALVINGS + 1):
        cand = kkt.arc_point(it, d, s)
        if cand.is_interior(kkt.MIN_ENTRY):
            new = kkt.corrector_direction(qp, cand, restore_feasibility=True).apply(cand)
            if new.is_interior():
                return s, cand, new
        logger.debug("positivity lost at sin(alpha)=%.3e, halving", s)
        s *= 0.5
    raise NumericalError(f"positivity not restored after {MAX_HALVINGS} halvings")


def _record(qp, k, s, cand, new, prox_before):
    r_x, r_y, r_z = residuals(qp, new)
    return IterationRecord(
        k=k,
        mu=new.mu,
        sin_alpha=s,
        kappa=kappa(qp, new),
        r_x=float(np.linalg.norm(r_x)),
        r_y=float(np.linalg.norm(r_y)),
        r_z=float(np.linalg.norm(r_z)),
        proximity_before=prox_before,
        proximity_after=proximity(new),
        mu_arc=cand.mu,
        drift=new.drift(),
    )


def solve_practical(qp: BoxQP, opts: SolverOptions | None = None) -> SolveReport:
    """Adaptive-step variant, terminated on ``kappa <= eps``."""
    opts = opts or SolverOptions()
    it = initial_point(qp)
    mu0 = it.mu
    records: list[IterationRecord] = []
    kap = kappa(qp, it)
    status = SolveStatus.MAX_ITER_REACHED
    message = ""
    try:
        for k in range(1, opts.max_iter + 1):
            if kap <= opts.eps:
                status = SolveStatus.CONVERGED
                break
            if it.mu <= opts.sigma:
                status = SolveStatus.MU_BELOW_SIGMA
                break
            d = kkt.derivatives(qp, it)
            budget = step.select_step(opts.theta, it, d, opts)
            s, cand, new = _take_step(qp, it, d, budget.sin_alpha)
            rec = _record(qp, k, s, cand, new, proximity(cand))
            records.append(rec)
            logger.debug("k=%d mu=%.3e sin=%.4f kappa=%.3e", k, rec.mu, s, rec.kappa)
            it, kap = new, rec.kappa
        else:
            if kap <= opts.eps:
                status = SolveStatus.CONVERGED
    except NumericalError as exc:
        status = SolveStatus.NUMERICAL_FAILURE
        message = str(exc)
        logger.warning("numerical failure after %d iterations: %s", len(records), exc)
    return SolveReport(status, it, records, qp.objective(it.x), mu0, message)


def solve_theoretical(qp: BoxQP, opts: SolverOptions | None = None) -> SolveReport:
    """Fixed-step variant with ``sin(alpha) = theta / sqrt(n)``.

    Stops once both ``mu`` and ``kappa`` are at most ``eps``.  The fixed
    step is checked, not clipped, against the positivity and proximity
    bounds it is known to satisfy.
    """
    opts = opts or SolverOptions(mode=Mode.THEORETICAL)
    it = initial_point(qp)
    mu0 = it.mu
    records: list[IterationRecord] = []
    s_fixed = opts.theta / math.sqrt(qp.n)
    kap = kappa(qp, it)
    status = SolveStatus.MAX_ITER_REACHED
    message = ""
    try:
        for k in range(1, opts.max_iter + 2):
            if it.mu <= opts.eps and kap <= opts.eps:
                status = SolveStatus.CONVERGED
                break
            if k > opts.max_iter:
                break
            d = kkt.derivatives(qp, it)
            s_tilde = step.alpha_tilde(step.neighborhood_coeffs(opts.theta, it.mu, qp.n, d))
            s_bar = step.alpha_bar(it.mu, d.ip_dd, qp.n, 0.0)
            if s_fixed > min(s_tilde, s_bar):
                logger.warning(
                    "fixed step %.4e exceeds safeguard min(%.4e, %.4e) at k=%d",
                    s_fixed, s_tilde, s_bar, k,
                )
            s, cand, new = _take_step(qp, it, d, s_fixed)
            rec = _record(qp, k, s, cand, new, proximity(cand))
            records.append(rec)
            it, kap = new, rec.kappa
    except NumericalError as exc:
        status = SolveStatus.NUMERICAL_FAILURE
        message = str(exc)
        logger.warning("numerical failure after %d iterations: %s", len(records), exc)
    return SolveReport(status, it, records, qp.objective(it.x), mu0, message)


def solve(qp: BoxQP, opts: SolverOptions | None = None) -> SolveReport:
    opts = opts or SolverOptions()
    if opts.mode is Mode.THEORETICAL:
        return solve_theoretical(qp, opts)
    return solve_practical(qp, opts)


def check_optimality(qp: BoxQP, x: np.ndarray, tol: float = 1e-6) -> bool:
    """KKT test for a candidate ``x`` with multipliers rebuilt from the gradient.

    With ``g = Hx + c`` the multipliers ``lam = max(-g, 0)`` and
    ``gam = max(g, 0)`` make stationarity exact, so the test reduces to box
    feasibility and complementarity ``lam (1 - x) <= tol``,
    ``gam (1 + x) <= tol``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (qp.n,):
        return False
    if np.any(np.abs(x) > 1.0 + tol):
        return False
    g = qp.H @ x + qp.c
    lam = np.maximum(-g, 0.0)
    gam = np.maximum(g, 0.0)
    comp = np.maximum(lam * np.maximum(1.0 - x, 0.0), gam * np.maximum(1.0 + x, 0.0))
    return bool(comp.max() <= tol)
