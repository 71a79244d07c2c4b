import numpy as np
import pytest
from scipy.integrate import quad

import critfield as cf
from critfield.reaction import Reaction


class TestAllenCahn:
    def test_cubic_values(self):
        r = cf.allen_cahn(1.0)
        assert r.F(0.3, 2.0) == pytest.approx(8.0)
        assert cf.allen_cahn(2.0).F_prime(0.1, 1.0) == pytest.approx(12.0)

    def test_rescaled_is_time_free(self):
        # t^{-3/2} (sqrt(t) u)^3 = u^3 for the cubic
        r = cf.allen_cahn(1.0)
        assert r.eval_f(0.5, 2.0) == pytest.approx(8.0, rel=1e-12)
        assert r.eval_f(0.01, 2.0) == pytest.approx(8.0, rel=1e-12)
        assert r.eval_f_prime(0.25, 3.0) == pytest.approx(27.0, rel=1e-12)

    def test_class_metadata(self):
        r = cf.allen_cahn(1.0)
        assert (r.L1, r.L2) == (0.0, 0.0)
        assert (r.gamma1, r.gamma2) == (2.0, 1.0)
        assert r.self_similar and r.is_pure_cubic
        report = cf.verify_class(r, [0.01, 1.0], np.linspace(-10, 10, 201))
        assert report.passed

    def test_invalid_coupling(self):
        with pytest.raises(ValueError):
            cf.allen_cahn(0.0)
        with pytest.raises(ValueError):
            cf.allen_cahn(-1.0)


class TestEvalF:
    @pytest.mark.parametrize("t", [0.0, -0.5])
    def test_nonpositive_time(self, t):
        r = cf.allen_cahn(1.0)
        with pytest.raises(ValueError):
            r.eval_f(t, 1.0)
        with pytest.raises(ValueError):
            r.eval_f_prime(t, 1.0)

    def test_oddness(self):
        r = cf.odd_poly([0.5, 0.25, 0.1])
        for t in (0.1, 1.0, 3.0):
            assert r.eval_f(t, 0.0) == 0.0
            for u in (0.3, 1.7, 4.0):
                assert r.eval_f(t, -u) == pytest.approx(-r.eval_f(t, u), rel=1e-14)
                assert r.eval_f_prime(t, -u) == pytest.approx(
                    r.eval_f_prime(t, u), rel=1e-14
                )

    def test_derivative_matches_central_difference(self):
        r = cf.odd_poly([0.5, 0.25, 0.1])
        d = 1e-6
        for t in (0.2, 1.0):
            for u in (0.5, 1.5, 2.5):
                fd = (r.eval_f(t, u + d) - r.eval_f(t, u - d)) / (2 * d)
                assert r.eval_f_prime(t, u) == pytest.approx(fd, rel=1e-6)

    def test_vectorized(self):
        r = cf.allen_cahn(1.0)
        u = np.array([[1.0, -2.0], [0.0, 3.0]])
        np.testing.assert_allclose(r.eval_f(0.5, u), u**3, rtol=1e-12)


class TestBuiltins:
    def test_linear(self):
        r = cf.linear(1.0)
        assert r.L1 == 1.0 and r.L2 == 0.0
        assert r.eval_f(0.3, 2.0) == pytest.approx(2.0 / 0.3, rel=1e-12)
        assert cf.verify_class(r, [0.5], np.linspace(-5, 5, 101)).passed

    def test_zero(self):
        r = cf.zero_reaction()
        assert r.is_zero
        assert r.eval_f(1.0, 3.0) == 0.0

    def test_odd_poly_constants(self):
        r = cf.odd_poly([2.0, 0.5])
        assert r.L1 == 2.0
        assert r.gamma1 == 2.0 and r.gamma2 == 1.0
        assert r.ell1 == pytest.approx(1.5)
        assert r.ell2 == pytest.approx(3.0)

    def test_odd_poly_quintic_flagged(self):
        r = cf.odd_poly([0.0, 0.0, 1.0])
        assert r.gamma1 == 4.0
        assert not r.in_s_prime

    def test_odd_poly_negative_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            cf.odd_poly([1.0, -0.5])

    def test_f_poly_coeffs(self):
        r = cf.odd_poly([2.0, 0.5])
        b = r.f_poly_coeffs(4.0)
        np.testing.assert_allclose(b, [2.0 / 4.0, 0.5])


class TestCutoff:
    def test_agreement_inside(self):
        r = cf.allen_cahn(1.0)
        c = cf.cutoff(r, 2.0)
        assert c.F(1.0, 1.0) == pytest.approx(1.0)
        # exact agreement where |sqrt(t) u| <= g
        for t in (0.25, 1.0, 4.0):
            for u in np.linspace(-2.0, 2.0, 21) / np.sqrt(t):
                assert c.eval_f(t, u) == r.eval_f(t, u)

    def test_piecewise_integral_oracle(self):
        # freeze the derivative at |w| = g and integrate out to w = 3
        r = cf.allen_cahn(1.0)
        c = cf.cutoff(r, 2.0)
        oracle, err = quad(lambda p: 3.0 * min(abs(p), 2.0) ** 2, 0.0, 3.0)
        assert err < 1e-10
        assert oracle == pytest.approx(20.0, abs=1e-9)
        assert c.F(1.0, 3.0) == pytest.approx(oracle, rel=1e-12)
        assert c.F(1.0, -3.0) == pytest.approx(-oracle, rel=1e-12)

    def test_lipschitz_constants(self):
        r = cf.allen_cahn(1.0)
        c = cf.cutoff(r, 2.0)
        assert c.L1 == pytest.approx(0.0 + 3.0 * (1 + 2.0**2))
        assert c.L2 == pytest.approx(0.0 + 6.0 * (1 + 2.0**1))
        w = np.linspace(-50, 50, 2001)
        assert np.abs(c.F_prime(1.0, w)).max() <= c.L1 + 1e-9

    def test_cutoff_keeps_monotonicity(self):
        c = cf.cutoff(cf.allen_cahn(1.0), 1.5)
        w = np.linspace(-20, 20, 401)
        assert (np.asarray(c.F2_prime(1.0, w)) >= 0).all()

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            cf.cutoff(cf.allen_cahn(1.0), 0.0)

    def test_pure_lipschitz_passthrough(self):
        r = cf.linear(1.0)
        c = cf.cutoff(r, 2.0)
        assert c.eval_f(1.0, 3.0) == r.eval_f(1.0, 3.0)


class TestVerifyClass:
    def test_wrong_growth_exponent_located(self):
        # quintic declared with quadratic growth must fail with a location
        def F2(t, w):
            return np.asarray(w, dtype=np.float64) ** 5

        def F2p(t, w):
            return 5.0 * np.asarray(w, dtype=np.float64) ** 4

        bad = Reaction(
            name="mislabeled-quintic", F2=F2, F2_prime=F2p,
            gamma1=2.0, gamma2=1.0, ell1=5.0, ell2=20.0,
        )
        report = cf.verify_class(bad, [1.0], np.linspace(-10, 10, 201))
        assert not report.passed
        assert report.lipschitz_F > 0
        assert report.worst_point is not None
        t, w = report.worst_point
        assert abs(w) > 2.0

    def test_even_reaction_fails_oddness(self):
        bad = Reaction(name="even", F1=lambda t, w: w * w, F1_prime=lambda t, w: 2 * w, L1=100.0)
        report = cf.verify_class(bad, [1.0], np.linspace(-3, 3, 31))
        assert not report.passed
        assert report.oddness > 1e-9

    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            cf.verify_class(cf.allen_cahn(1.0), [], [1.0])


class TestFromConfig:
    def test_builtins(self):
        assert cf.reaction_from_config({"name": "allen-cahn", "lambda": 2.0}).lam == 2.0
        assert cf.reaction_from_config({"name": "linear", "constants": {"L1": 0.5}}).L1 == 0.5
        assert cf.reaction_from_config({"name": "odd-poly", "coefficients": [1.0, 2.0]}).poly == (1.0, 2.0)
        assert cf.reaction_from_config({"name": "zero"}).is_zero

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown reaction"):
            cf.reaction_from_config({"name": "sine-gordon"})
