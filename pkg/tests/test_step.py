import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcqp import kkt, step
from arcqp.qp_core import BoxQP, Iterate, SolverOptions, initial_point, proximity
from arcqp.solver import _take_step
from oracles import bisect_reference, random_spd

THETA = 0.19


def random_case(rng, n):
    H = random_spd(rng, n)
    x = rng.uniform(-1, 1, n) * 0.999
    lam = 10.0 ** rng.uniform(-2, 2, n)
    gam = 10.0 ** rng.uniform(-2, 2, n)
    return BoxQP(H, rng.standard_normal(n)), Iterate(x, 1.0 - x, 1.0 + x, lam, gam)


class TestCardano:
    @pytest.mark.parametrize("p, q, root", [(0.0, -8.0, 2.0), (3.0, -4.0, 1.0), (6.0, -20.0, 2.0)])
    def test_examples(self, p, q, root):
        assert step.cardano_root(p, q) == pytest.approx(root, rel=1e-14)

    def test_nonpositive_discriminant_rejected(self):
        with pytest.raises(ValueError):
            step.cardano_root(-3.0, 2.0)  # double root
        with pytest.raises(ValueError):
            step.cardano_root(-3.0, 0.0)  # three real roots

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
    def test_residual(self, p, q):
        if not (q / 2) ** 2 + (p / 3) ** 3 > 0:
            return
        x = step.cardano_root(p, q)
        assert abs(x**3 + p * x + q) <= 1e-10 * max(1.0, abs(q))


class TestBisection:
    @pytest.mark.parametrize("f, root", [(lambda s: s - 0.5, 0.5), (lambda s: s * s - 0.25, 0.5)])
    def test_examples(self, f, root):
        s = step.smallest_positive_root_monotone(f)
        assert s <= root and root - s <= 1e-12

    def test_linear_quartic_caps_at_one(self):
        q = step.QuarticCoeffs(0.0, 0.0, 0.0, 0.19, -0.19)
        assert step.smallest_positive_root_monotone(q) == 1.0

    def test_bad_start_rejected(self):
        with pytest.raises(ValueError):
            step.smallest_positive_root_monotone(lambda s: s)

    def test_returns_safe_side_with_tight_bracket(self):
        f = lambda s: s**3 + s - 0.7
        s = step.smallest_positive_root_monotone(f)
        assert f(s) <= 0.0 < f(s + 1e-12)
        assert s == pytest.approx(bisect_reference(f, 0.0, 1.0), abs=1e-12)


class TestAlphaBar:
    def test_linear_case(self):
        mu, sigma = 2.0, 1e-3
        assert step.alpha_bar(mu, 0.0, 3, sigma) == pytest.approx(1 - sigma / mu, abs=1e-12)

    def test_hand_case(self):
        f = lambda s: -(1 - s - (s**4 + s**2))
        s = step.alpha_bar(1.0, 2.0, 1, 0.0)
        assert s == pytest.approx(bisect_reference(f, 0.0, 1.0), abs=1e-12)
        assert s == pytest.approx(0.5698, abs=1e-4)

    def test_conservative_bound(self):
        ratio = (1 + THETA) / (2 * (1 - THETA))
        for n, mu in [(1, 1.0), (10, 0.3), (500, 7.0)]:
            s = step.alpha_bar(mu, 2 * n * mu * ratio, n, 0.0)
            assert s == pytest.approx(0.6158, abs=1e-3)

    def test_requires_mu_above_sigma(self):
        with pytest.raises(ValueError):
            step.alpha_bar(1e-10, 1.0, 1, 1e-10)

    def test_gap_stays_above_sigma(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 15))
            qp, it = random_case(rng, n)
            d = kkt.derivatives(qp, it)
            sigma = 1e-3 * it.mu
            s = step.alpha_bar(it.mu, d.ip_dd, n, sigma)
            lower = it.mu * (1 - s) - d.ip_dd / (2 * n) * (s**4 + s**2)
            assert lower >= sigma * (1 - 1e-9)


class TestNeighborhoodQuartic:
    def test_coefficients(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 15))
            qp, it = random_case(rng, n)
            d = kkt.derivatives(qp, it)
            q = step.neighborhood_coeffs(THETA, it.mu, n, d)
            assert q.a1 == -q.a0 == THETA * it.mu
            assert q.a2 >= 0 and q.a3 >= 0 and q.a4 >= 0
            s = np.linspace(0, 1, 50)
            assert np.all(np.diff([q(v) for v in s]) >= 0)

    def test_brute_force_hand_case(self):
        qp = BoxQP([[1.0]], [0.0])
        it = Iterate(np.zeros(1), np.ones(1), np.ones(1), np.array([1.0]), np.array([4.0]))
        d = kkt.derivatives(qp, it)
        n, mu = 1, it.mu
        pd, wd, pdd, wdd = d.pdot, d.wdot, d.pddot, d.wddot
        a3 = np.linalg.norm(pd * wdd + wd * pdd - (pd @ wdd + pdd @ wd) / (2 * n))
        a4 = np.linalg.norm(pdd * wdd - wd * pd - (pdd @ wdd - pd @ wd) / (2 * n)) + 2 * THETA * (pd @ wd) / (2 * n)
        q = step.neighborhood_coeffs(THETA, mu, n, d)
        assert q.a3 == pytest.approx(a3, rel=1e-13)
        assert q.a4 == pytest.approx(a4, rel=1e-13)
        assert q.a2 == pytest.approx(2 * THETA * (pd @ wd) / (2 * n), rel=1e-13)

    def test_zero_direction(self):
        qp = BoxQP([[1.0]], [0.0])
        it = initial_point(qp)
        d = kkt.derivatives(qp, it)
        q = step.neighborhood_coeffs(THETA, it.mu, 1, d)
        assert (q.a2, q.a3, q.a4) == (0.0, 0.0, 0.0)
        assert step.alpha_tilde(q) == 1.0

    def test_hand_quartic(self):
        q = step.QuarticCoeffs(1.0, 0.0, 0.0, 1.0, -0.5)
        s = step.alpha_tilde(q)
        assert s == pytest.approx(bisect_reference(lambda v: v**4 + v - 0.5, 0, 1), abs=1e-12)
        # s^4 + s = 0.5; note q(0.4756) = +0.027, so 0.4756 is not a root
        assert s == pytest.approx(0.45655, abs=1e-5)

    def test_lower_bound_in_neighborhood(self, rng):
        checked = 0
        while checked < 40:
            n = int(rng.integers(1, 30))
            H = random_spd(rng, n)
            c = rng.standard_normal(n)
            qp = BoxQP(H, c)
            it = initial_point(qp)
            d = kkt.derivatives(qp, it)
            s = step.alpha_tilde(step.neighborhood_coeffs(THETA, it.mu, n, d))
            assert s >= THETA / math.sqrt(n) - 1e-12
            checked += 1


class TestAlphaAcute:
    def test_root_satisfies_polynomial(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 15))
            qp, it = random_case(rng, n)
            d = kkt.derivatives(qp, it)
            pc = step.acute_coeffs(THETA, it.mu, n, d).clamped()
            s = step.alpha_acute(THETA, it.mu, n, d)
            if s < 1.0:
                assert pc(s) <= 0.0 < pc(s + 1e-12)

    def test_clamping_never_enlarges_root(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 15))
            qp, it = random_case(rng, n)
            d = kkt.derivatives(qp, it)
            raw = step.acute_coeffs(THETA, it.mu, n, d)
            if raw.b3 >= 0 and raw.b4 >= 0:
                continue
            g = np.linspace(0, 1, 2001)
            vals = np.array([raw(v) for v in g])
            # compare against the first sign change of the raw polynomial
            first = g[np.argmax(vals > 0)] if np.any(vals > 0) else 1.0
            assert step.alpha_acute(THETA, it.mu, n, d) <= first + 1e-3

    def test_derivative_free_case(self):
        qp = BoxQP(np.eye(2), np.zeros(2))
        it = initial_point(qp)
        d = kkt.derivatives(qp, it)
        assert step.alpha_acute(THETA, it.mu, 2, d) == 1.0


class TestAlphaBreve:
    def test_boundary_case(self):
        assert step.alpha_breve(1.0, 1, 2 * 1 * 1.0 / 6.0) == 1.0

    def test_half(self):
        s = step.alpha_breve(1.0, 1, 1.0)  # v = 1/2
        assert 2 * s**3 + s - 1 == pytest.approx(0.0, abs=1e-14)
        assert s == pytest.approx(0.5898, abs=1e-4)

    def test_limit(self):
        assert step.alpha_breve(1.0, 1, 1e12) < 1e-3

    @pytest.mark.parametrize("v", [0.2, 0.5, 1.0, 5.0, 100.0])
    def test_minimises_gap_bound(self, v):
        n, mu = 3, 2.0
        s_star = step.alpha_breve(mu, n, 2 * n * mu * v)
        u = 0.3
        F = lambda z: (1 + u) * v * z**4 + (1 + u) * v * z**2 - (1 + u) * z + u
        for s in np.linspace(0, 1, 100):
            assert F(s_star) <= F(s) + 1e-13


class TestAlphaHat:
    def test_boundary(self):
        assert step.alpha_hat(1.0, 2, 2.0) == 1.0

    def test_ratio_two(self):
        g = step.alpha_hat(1.0, 1, 2.0)
        r = math.sqrt(0.25 + 1 / 27)
        expected = float(np.cbrt(0.5 + r) + np.cbrt(0.5 - r))
        assert g == pytest.approx(expected, rel=1e-14)
        # with w = x''Hx''/(2 n mu) = 1 the bound's cubic is -1 + w g + w g^3
        assert -1 + g + g**3 == pytest.approx(0.0, abs=1e-14)

    def test_gap_does_not_increase(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 15))
            qp, it = random_case(rng, n)
            d = kkt.derivatives(qp, it)
            s_hat = step.alpha_hat(it.mu, n, d.ip_dddd)
            for s in np.linspace(0, s_hat, 20):
                assert kkt.mu_alpha(it, d, float(s)) <= it.mu * (1 + 1e-12)


class TestSelectStep:
    def test_degenerate_direction(self):
        qp = BoxQP(np.eye(3), np.zeros(3))
        it = initial_point(qp)
        d = kkt.derivatives(qp, it)
        opts = SolverOptions()
        b = step.select_step(THETA, it, d, opts)
        assert b.sin_bar == pytest.approx(1 - opts.sigma / it.mu, abs=1e-12)
        assert b.sin_check == 1.0 and b.sin_breve == 1.0
        assert b.sin_alpha == pytest.approx(1 - opts.sigma / it.mu, abs=1e-12)

    def test_budget_is_minimum_and_keeps_neighborhood(self, rng):
        opts = SolverOptions()
        for _ in range(40):
            n = int(rng.integers(1, 25))
            qp = BoxQP(random_spd(rng, n), rng.standard_normal(n))
            it = initial_point(qp)
            for _ in range(3):
                d = kkt.derivatives(qp, it)
                b = step.select_step(THETA, it, d, opts)
                assert b.sin_alpha == min(b.sin_bar, b.sin_check, b.sin_breve, step.MAX_SIN)
                assert b.sin_check == max(b.sin_tilde, b.sin_acute)
                for v in (b.sin_bar, b.sin_check, b.sin_breve, b.sin_alpha):
                    assert 0.0 < v <= 1.0
                cand = kkt.arc_point(it, d, b.sin_alpha)
                assert cand.is_interior()
                assert proximity(cand) <= 2 * THETA + 1e-8
                _, _, it = _take_step(qp, it, d, b.sin_alpha)
