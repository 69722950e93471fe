import numpy as np
import pytest

from stringstab import (
    AffineTerm,
    ControllerGains,
    InvalidGainsError,
    eval_affine,
    eval_c1,
    eval_c2,
    eval_m,
    quadratic_residuals,
)

from conftest import REFERENCE, SYMMETRIC, random_gains, random_upper_half_plane


def residual_scale(g, s):
    """Backward-error scale: sum of the magnitudes of the quadratic's terms."""
    w = np.abs(s * s + g.q(s))
    c1 = np.abs(eval_c1(g, s))
    c2 = np.abs(eval_c2(g, s))
    p1 = np.abs(g.p1(s))
    p2 = np.abs(g.p2(s))
    return (p2 * c1 * c1 + w * c1 + p1, p1 * c2 * c2 + w * c2 + p2)


class TestAffineTerm:
    def test_constant_term(self):
        assert eval_affine(AffineTerm(1.0, 1.0), 0j) == 1 + 0j

    def test_direct_substitution(self):
        assert eval_affine(AffineTerm(10.0, 100.0), 1j) == 10 + 100j

    def test_root_of_term(self):
        assert eval_affine(AffineTerm(1.0, 1.0), -1 + 0j) == 0j

    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_positivity_enforced(self, a, b):
        with pytest.raises(InvalidGainsError):
            AffineTerm(a, b)

    def test_nan_rejected(self):
        with pytest.raises(InvalidGainsError):
            AffineTerm(float("nan"), 1.0)


class TestEvalM:
    def test_symmetric_zero_radicand(self):
        assert eval_m(SYMMETRIC, 0j) == 0j

    def test_reference_at_zero(self):
        # radicand (1+10)^2 - 4*10 = 81
        assert eval_m(REFERENCE, 0j) == pytest.approx(9 + 0j)

    def test_high_frequency_cancellation(self):
        s = 1e3j
        w = s * s + REFERENCE.q(s)
        m = eval_m(REFERENCE, s)
        assert abs(w - m) < 1e-2 * abs(w)

    def test_branch_consistency_on_axis(self):
        omega = np.logspace(-4, 4, 4001)
        s = 1j * omega
        w = s * s + REFERENCE.q(s)
        m = eval_m(REFERENCE, s)
        assert np.all(np.abs(w - m) <= np.abs(w + m))

    def test_continuity_probe(self):
        # 1e4 log-spaced points: steps bounded by the analytic derivative,
        # and the chosen root never flips sign between neighbours
        omega = np.logspace(-4, 4, 10_000)
        s = 1j * omega
        g = REFERENCE
        m = eval_m(g, s)
        w = s * s + g.q(s)
        dw = 2 * s + g.b1 + g.b2
        dm = np.abs((w * dw - 2 * (g.b1 * g.p2(s) + g.p1(s) * g.b2)) / m)
        steps = np.abs(np.diff(m))
        bound = 0.5 * (dm[1:] + dm[:-1]) * np.diff(omega)
        assert np.all(steps <= 10.0 * bound)
        assert np.all(np.abs(np.diff(m)) <= np.abs(m[1:] + m[:-1]))  # no flips


class TestFlowFunctions:
    def test_c1_reference_at_zero(self):
        assert eval_c1(REFERENCE, 0j) == pytest.approx(0.1 + 0j)

    def test_c1_symmetric_at_zero(self):
        assert eval_c1(SYMMETRIC, 0j) == pytest.approx(1.0 + 0j)

    def test_c2_reference_at_zero(self):
        assert eval_c2(REFERENCE, 0j) == pytest.approx(1.0 + 0j)

    def test_c2_above_one_at_low_frequency(self):
        omega = np.logspace(-2, 0, 50)
        c2 = eval_c2(REFERENCE, 1j * omega)
        assert np.all(np.abs(c2) > 1.0)

    def test_ratio_three_product(self):
        g = ControllerGains(AffineTerm(1.0, 1.0), AffineTerm(3.0, 3.0))
        c1 = eval_c1(g, 0j)
        c2 = eval_c2(g, 0j)
        assert c1 * c2 == pytest.approx(1 / 3, abs=1e-12)
        # cross-check against the scalar bound f(x) with x = 4a/(1+a)^2
        x = 4 * 3 / (1 + 3) ** 2
        f = abs(1 - np.sqrt(1 - x)) / np.sqrt(x)
        assert abs(c1 * c2) == pytest.approx(f * f, abs=1e-12)

    def test_symmetric_equal_magnitudes(self):
        omega = np.logspace(-4, 4, 500)
        s = 1j * omega
        assert np.allclose(
            np.abs(eval_c1(SYMMETRIC, s)), np.abs(eval_c2(SYMMETRIC, s)), rtol=0, atol=1e-14
        )

    def test_product_identity_direct(self):
        # C1*C2 equals ((s^2+q) - m)^2 / (4 p1 p2); direct ratio away from
        # the cancellation-limited top decade
        omega = np.logspace(-4, 3, 3000)
        s = 1j * omega
        g = REFERENCE
        w = s * s + g.q(s)
        m = eval_m(g, s)
        ref = (w - m) ** 2 / (4 * g.p1(s) * g.p2(s))
        prod = eval_c1(g, s) * eval_c2(g, s)
        assert np.max(np.abs(prod - ref) / np.abs(ref)) < 1e-10

    def test_product_identity_cross_multiplied(self):
        omega = np.logspace(-4, 4, 3000)
        s = 1j * omega
        g = REFERENCE
        w = s * s + g.q(s)
        m = eval_m(g, s)
        lhs = eval_c1(g, s) * eval_c2(g, s) * 4 * g.p1(s) * g.p2(s)
        rhs = (w - m) ** 2
        scale = np.maximum(np.abs(4 * g.p1(s) * g.p2(s)), np.abs(rhs))
        assert np.max(np.abs(lhs - rhs) / scale) < 1e-10


class TestQuadraticResiduals:
    @pytest.mark.parametrize(
        "g",
        [REFERENCE, SYMMETRIC, ControllerGains.from_gains(0.3, 7.0, 2.5, 0.04)],
        ids=["reference", "symmetric", "mixed"],
    )
    def test_at_s_equal_j(self, g):
        r1, r2 = quadratic_residuals(g, 1j)
        w2 = abs(1j * 1j + g.q(1j)) ** 2
        assert abs(r1) < 1e-12 * w2
        assert abs(r2) < 1e-12 * w2

    def test_symmetric_exact_at_zero(self):
        assert quadratic_residuals(SYMMETRIC, 0j) == (0j, 0j)

    def test_random_upper_half_plane_sweep(self):
        rng = np.random.default_rng(42)
        s = random_upper_half_plane(rng, 1000)
        r1, r2 = quadratic_residuals(REFERENCE, s)
        s1, s2 = residual_scale(REFERENCE, s)
        assert np.max(np.abs(r1) / s1) < 1e-10
        assert np.max(np.abs(r2) / s2) < 1e-10

    def test_random_gains_random_points(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            g = random_gains(rng)
            s = random_upper_half_plane(rng, 200)
            r1, r2 = quadratic_residuals(g, s)
            s1, s2 = residual_scale(g, s)
            assert np.max(np.abs(r1) / s1) < 1e-10
            assert np.max(np.abs(r2) / s2) < 1e-10
