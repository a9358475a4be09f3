import math

import numpy as np
import pytest

from arcqp import BoxQP, Mode, SolverOptions, solve
from oracles import enumerate_box_qp, random_spd

SUITE_SEED = 20240611
THEORY_SEED = 77


def unit_instance(rng, n):
    """SPD H with eigenvalues in [10^-1.5, 10^1.5] and standard normal c."""
    return random_spd(rng, n), rng.standard_normal(n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def practical_suite():
    """200 random instances with n <= 8, solved in practical mode, with oracle optima."""
    rng = np.random.default_rng(SUITE_SEED)
    out = []
    for _ in range(200):
        n = int(rng.integers(1, 9))
        H, c = unit_instance(rng, n)
        qp = BoxQP(H, c)
        report = solve(qp, SolverOptions())
        x_star, f_star = enumerate_box_qp(H, c)
        out.append((qp, report, x_star, f_star))
    return out


@pytest.fixture(scope="session")
def theoretical_suite():
    """50 random instances with n in 2..50, solved with the fixed theoretical step."""
    rng = np.random.default_rng(THEORY_SEED)
    opts = SolverOptions(mode=Mode.THEORETICAL, max_iter=20000)
    out = []
    for _ in range(50):
        n = int(rng.integers(2, 51))
        H, c = unit_instance(rng, n)
        qp = BoxQP(H, c)
        out.append((qp, solve(qp, opts)))
    return out


def rate_bound(n):
    return 1.0 - 0.0185 / math.sqrt(n)
