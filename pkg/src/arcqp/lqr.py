"""Condensing input-saturated discrete LQR problems into box QPs.

For ``x_{s+1} = A x_s + B u_s`` with ``|u_s| <= 1`` and cost

    J = 1/2 x_N' P x_N + 1/2 sum_{k=0}^{N-1} (x_k' Q x_k + u_k' R u_k)

the states are eliminated through ``x_k = A^k x_0 + phi_k v_k`` and the
cost becomes ``1/2 v'Hv + c'v + offset`` in the stacked controls
``v = (u_0, ..., u_{N-1})``.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np

from .qp_core import BoxQP, ProblemError, check_spd


@dataclasses.dataclass(frozen=True, eq=False)
class LqrProblem:
    A: np.ndarray
    B: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    N: int
    x0: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=np.float64))
        B = np.array(self.B, dtype=np.float64)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        P = np.atleast_2d(np.array(self.P, dtype=np.float64))
        Q = np.atleast_2d(np.array(self.Q, dtype=np.float64))
        R = np.atleast_2d(np.array(self.R, dtype=np.float64))
        x0 = np.array(self.x0, dtype=np.float64).reshape(-1)
        r = x0.size
        if A.shape != (r, r):
            raise ProblemError(f"A must be {r}x{r}, got {A.shape}")
        if B.ndim != 2 or B.shape[0] != r:
            raise ProblemError(f"B must have {r} rows, got shape {B.shape}")
        m = B.shape[1]
        for name, M, k in (("P", P, r), ("Q", Q, r), ("R", R, m)):
            if M.shape != (k, k):
                raise ProblemError(f"{name} must be {k}x{k}, got {M.shape}")
            check_spd(M, name)
        if int(self.N) != self.N or self.N < 1:
            raise ProblemError(f"horizon N must be a positive integer, got {self.N}")
        for name, val in (("A", A), ("B", B), ("P", P), ("Q", Q), ("R", R), ("x0", x0)):
            if not np.all(np.isfinite(val)):
                raise ProblemError(f"{name} has non-finite entries")
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "N", int(self.N))

    @property
    def r(self) -> int:
        return self.x0.size

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclasses.dataclass(frozen=True, eq=False)
class CondensedQP:
    qp: BoxQP
    N: int
    m: int
    r: int
    objective_offset: float

    def controls(self, v: np.ndarray) -> np.ndarray:
        """Reshape the stacked QP variable into an ``N x m`` control sequence."""
        return np.asarray(v).reshape(self.N, self.m)

    def cost(self, v: np.ndarray) -> float:
        return self.qp.objective(np.asarray(v).reshape(-1)) + self.objective_offset


def _input_responses(A, B, N):
    """``[A^0 B, A^1 B, ..., A^{N-1} B]`` by repeated multiplication."""
    blocks = [B]
    for _ in range(N - 1):
        blocks.append(A @ blocks[-1])
    return blocks


def build_phi(A: np.ndarray, B: np.ndarray, k: int) -> np.ndarray:
    """Block row ``[A^{k-1} B, ..., A B, B]`` mapping ``(u_0..u_{k-1})`` to the forced state."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.asarray(B, dtype=np.float64)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if A.shape[0] != A.shape[1] or B.shape[0] != A.shape[0]:
        raise ProblemError(f"incompatible shapes A {A.shape}, B {B.shape}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return np.hstack(_input_responses(A, B, k)[::-1])


def _prediction_matrices(lqr: LqrProblem):
    """Stacked free and forced responses for ``x_1..x_N``.

    Returns ``(F, G)`` with ``x_k = F[k-1] x_0 + G[k-1] v``; ``G[k-1]`` is
    ``phi_k`` zero-padded to ``N m`` columns.
    """
    N, r, m = lqr.N, lqr.r, lqr.m
    resp = _input_responses(lqr.A, lqr.B, N)
    G = np.zeros((N, r, N * m))
    for k in range(1, N + 1):
        for j in range(k):
            # u_j reaches x_k through A^{k-1-j} B
            G[k - 1, :, j * m:(j + 1) * m] = resp[k - 1 - j]
    F = np.empty((N, r, r))
    Ak = np.eye(r)
    for k in range(N):
        Ak = lqr.A @ Ak
        F[k] = Ak
    return F, G


def condense(lqr: LqrProblem) -> CondensedQP:
    N, r, m = lqr.N, lqr.r, lqr.m
    F, G = _prediction_matrices(lqr)
    # state weights for x_1..x_{N-1} are Q, for x_N it is P
    W = np.broadcast_to(lqr.Q, (N, r, r)).copy()
    W[-1] = lqr.P
    WG = np.einsum("kab,kbj->kaj", W, G)
    H = G.reshape(N * r, N * m).T @ WG.reshape(N * r, N * m) + np.kron(np.eye(N), lqr.R)
    H = 0.5 * (H + H.T)
    free = F @ lqr.x0
    c = np.einsum("ka,kaj->j", free, WG)
    offset = 0.5 * float(
        np.einsum("ka,kab,kb->", free, W, free) + lqr.x0 @ lqr.Q @ lqr.x0
    )
    return CondensedQP(BoxQP(H, c), N, m, r, offset)


def simulate(lqr: LqrProblem, u: np.ndarray) -> tuple[np.ndarray, float]:
    """Propagate the dynamics from ``x0`` and evaluate the full cost.

    ``u`` may be given stacked (length ``N m``) or as an ``N x m`` array.
    Returns the ``(N+1) x r`` state trajectory and the cost.
    """
    u = np.asarray(u, dtype=np.float64).reshape(lqr.N, lqr.m)
    if np.any(np.abs(u) > 1.0 + 1e-9):
        warnings.warn(
            f"control exceeds the unit box (max |u| = {np.abs(u).max():.6g})",
            RuntimeWarning,
            stacklevel=2,
        )
    states = np.empty((lqr.N + 1, lqr.r))
    states[0] = lqr.x0
    cost = 0.0
    for s in range(lqr.N):
        xs, us = states[s], u[s]
        cost += 0.5 * (xs @ lqr.Q @ xs + us @ lqr.R @ us)
        states[s + 1] = lqr.A @ xs + lqr.B @ us
    cost += 0.5 * states[-1] @ lqr.P @ states[-1]
    return states, float(cost)


def weight_scaling(lqr: LqrProblem, h: float) -> LqrProblem:
    """Scale the running weights ``Q`` and ``R`` by ``h``; ``P`` is untouched."""
    if not h > 0.0:
        raise ValueError(f"weight scale must be positive, got {h}")
    return dataclasses.replace(lqr, Q=h * lqr.Q, R=h * lqr.R)


def bertsekas_example(T: float = 50.0, N: int = 500) -> LqrProblem:
    """Harmonic oscillator with saturated input, Euler-discretised with ``h = T/N``.

    ``A = [[1, h], [-h, 1]]``, ``B = [0, h]'``, ``P = Q = diag(2, 1)``,
    ``R = 6`` and ``x0 = (15, 5)``; running weights are scaled by ``h``.
    """
    h = T / N
    lqr = LqrProblem(
        A=[[1.0, h], [-h, 1.0]],
        B=[[0.0], [h]],
        P=np.diag([2.0, 1.0]),
        Q=np.diag([2.0, 1.0]),
        R=[[6.0]],
        N=N,
        x0=[15.0, 5.0],
    )
    return weight_scaling(lqr, h)
