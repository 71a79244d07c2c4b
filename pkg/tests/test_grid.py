import math

import numpy as np
import pytest

import critfield as cf
from critfield.grid import RealField, SpectralField, recommended_side_length


class TestTorusGrid:
    def test_spacing(self):
        g = cf.TorusGrid(8.0, 64)
        assert g.h == 8.0 / 64

    def test_wavenumbers(self):
        g = cf.TorusGrid(4.0, 16)
        expected = 2 * np.pi * np.array([0, 1, 2, 3, 4, 5, 6, 7, -8, -7, -6, -5, -4, -3, -2, -1]) / 4.0
        np.testing.assert_allclose(np.sort(g.xi), np.sort(expected))

    @pytest.mark.parametrize("L,n", [(0.0, 64), (-1.0, 64), (8.0, 7), (8.0, 4)])
    def test_invalid(self, L, n):
        with pytest.raises(ValueError):
            cf.TorusGrid(L, n)


class TestFields:
    def test_shape_mismatch(self, grid64):
        with pytest.raises(ValueError, match="shape"):
            RealField(grid64, np.zeros((32, 32)))

    def test_nonfinite_rejected(self, grid64):
        vals = np.zeros((64, 64))
        vals[3, 5] = np.inf
        with pytest.raises(ValueError, match="non-finite"):
            RealField(grid64, vals)

    def test_values_readonly(self, grid64, rng):
        f = RealField(grid64, rng.standard_normal((64, 64)))
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0


class TestTransforms:
    def test_constant_mode(self, grid64):
        f = RealField(grid64, np.full((64, 64), 3.25))
        F = cf.forward_transform(f)
        assert F.coefficients[0, 0] == pytest.approx(3.25, abs=1e-14)
        rest = F.coefficients.copy()
        rest[0, 0] = 0.0
        assert np.abs(rest).max() < 1e-14

    def test_zero_field(self, grid64):
        F = cf.forward_transform(RealField(grid64, np.zeros((64, 64))))
        assert np.abs(F.coefficients).max() == 0.0

    def test_single_cosine_mode(self, grid64):
        # cos(2 pi x / L) has two conjugate coefficients of magnitude 1/2
        x, _ = np.meshgrid(*grid64.coords(), indexing="ij")
        F = cf.forward_transform(RealField(grid64, np.cos(2 * np.pi * x / grid64.L)))
        c = F.coefficients
        assert c[1, 0] == pytest.approx(0.5, abs=1e-13)
        assert c[-1, 0] == pytest.approx(0.5, abs=1e-13)
        mask = np.ones_like(c, dtype=bool)
        mask[1, 0] = mask[-1, 0] = False
        assert np.abs(c[mask]).max() < 1e-13

    def test_roundtrip(self, grid64, rng):
        f = RealField(grid64, rng.standard_normal((64, 64)))
        back = cf.inverse_transform(cf.forward_transform(f))
        assert np.abs(back.values - f.values).max() < 1e-12 * np.abs(f.values).max()

    def test_inverse_constant(self, grid64):
        c = np.zeros((64, 64), dtype=complex)
        c[0, 0] = 2.5
        f = cf.inverse_transform(SpectralField(grid64, c))
        np.testing.assert_allclose(f.values, 2.5)

    def test_inverse_zero(self, grid64):
        f = cf.inverse_transform(SpectralField(grid64, np.zeros((64, 64), dtype=complex)))
        assert np.abs(f.values).max() == 0.0

    def test_symmetry_violation_rejected(self, grid64):
        c = np.zeros((64, 64), dtype=complex)
        c[1, 2] = 1.0  # no conjugate partner
        with pytest.raises(ValueError, match="Hermitian"):
            cf.inverse_transform(SpectralField(grid64, c))


class TestSemigroup:
    def test_identity_at_t0(self, grid64, rng):
        f = RealField(grid64, rng.standard_normal((64, 64)))
        out = cf.apply_semigroup(f, 0.0, 5.0)
        np.testing.assert_array_equal(out.values, f.values)

    def test_constant_preserved(self, grid64):
        f = RealField(grid64, np.full((64, 64), 1.75))
        out = cf.apply_semigroup(f, 2.3, 0.0)
        np.testing.assert_allclose(out.values, 1.75, rtol=1e-13)

    def test_cosine_eigenfunction(self, grid64):
        # single mode decays by exp(-2 pi^2 t / L^2)
        x, _ = np.meshgrid(*grid64.coords(), indexing="ij")
        mode = np.cos(2 * np.pi * x / grid64.L)
        out = cf.apply_semigroup(RealField(grid64, mode), 1.0, 0.0)
        expected = mode * math.exp(-2 * math.pi**2 / grid64.L**2)
        assert np.abs(out.values - expected).max() < 1e-13

    def test_negative_time_rejected(self, grid64):
        f = RealField(grid64, np.zeros((64, 64)))
        with pytest.raises(ValueError, match="nonnegative"):
            cf.apply_semigroup(f, -0.1, 0.0)

    def test_composition(self, grid64, rng):
        f = RealField(grid64, rng.standard_normal((64, 64)))
        ab = cf.apply_semigroup(cf.apply_semigroup(f, 0.3, 1.2), 0.7, 1.2)
        once = cf.apply_semigroup(f, 1.0, 1.2)
        scale = np.abs(once.values).max()
        assert np.abs(ab.values - once.values).max() < 1e-12 * scale

    @pytest.mark.parametrize("m", [0.0, 1.0, -0.5])
    def test_mass_scales_mean(self, grid64, rng, m):
        f = RealField(grid64, rng.standard_normal((64, 64)) + 0.7)
        out = cf.apply_semigroup(f, 0.8, m)
        assert out.values.mean() == pytest.approx(
            math.exp(m * 0.8) * f.values.mean(), rel=1e-12
        )

    def test_linearity(self, grid64, rng):
        f = rng.standard_normal((64, 64))
        g = rng.standard_normal((64, 64))
        lhs = cf.apply_semigroup(RealField(grid64, 2.0 * f - 3.0 * g), 0.5, 1.0).values
        rhs = (
            2.0 * cf.apply_semigroup(RealField(grid64, f), 0.5, 1.0).values
            - 3.0 * cf.apply_semigroup(RealField(grid64, g), 0.5, 1.0).values
        )
        assert np.abs(lhs - rhs).max() < 1e-12 * np.abs(lhs).max()


def brute_force_mode_sum(grid: cf.TorusGrid, t_eff: float) -> float:
    """Independent oracle: full n x n mode sum of squared multipliers."""
    return float(np.exp(-grid.xi_sq_full * t_eff).sum() / grid.L**2)


class TestGridPointVariance:
    def test_matches_continuum(self):
        g = cf.TorusGrid(8.0, 512)
        v = cf.grid_point_variance(g, 0.01)
        assert v == pytest.approx(1.0 / (4 * math.pi * 0.01), rel=1e-2)

    def test_matches_mode_sum_oracle(self):
        g = cf.TorusGrid(8.0, 128)
        for t in (0.01, 0.5, 10.0):
            assert cf.grid_point_variance(g, t) == pytest.approx(
                brute_force_mode_sum(g, t), rel=1e-13
            )

    def test_large_time_only_constant_mode(self):
        g = cf.TorusGrid(8.0, 64)
        v = cf.grid_point_variance(g, 1e6)
        assert v == pytest.approx(brute_force_mode_sum(g, 1e6), rel=1e-13)
        assert v == pytest.approx(1.0 / g.L**2, rel=1e-12)

    def test_resolution_refinement(self):
        v1 = cf.grid_point_variance(cf.TorusGrid(8.0, 256), 0.01)
        v2 = cf.grid_point_variance(cf.TorusGrid(8.0, 512), 0.01)
        assert abs(v2 - v1) / v1 < 1e-3

    def test_invalid_time(self, grid64):
        with pytest.raises(ValueError):
            cf.grid_point_variance(grid64, 0.0)


class TestKernelField:
    def test_mass_one(self, grid256):
        k = cf.kernel_field(grid256, 0.05, (2.0, 2.0))
        assert k.values.sum() * grid256.h**2 == pytest.approx(1.0, rel=1e-12)

    def test_peak_location_and_value(self, grid256):
        z = (1.0, 3.0)
        k = cf.kernel_field(grid256, 0.02, z)
        i, j = np.unravel_index(np.argmax(k.values), k.values.shape)
        assert (i * grid256.h, j * grid256.h) == z
        # resolved kernel peak matches the continuum value
        assert k.values[i, j] == pytest.approx(1.0 / (2 * math.pi * 0.02), rel=1e-6)

    def test_equals_semigroup_of_delta(self, grid256):
        z = (2.0, 1.5)
        iz = (int(2.0 / grid256.h), int(1.5 / grid256.h))
        delta = np.zeros((grid256.n, grid256.n))
        delta[iz] = 1.0 / grid256.h**2
        flowed = cf.apply_semigroup(RealField(grid256, delta), 0.1, 0.0)
        k = cf.kernel_field(grid256, 0.1, z)
        assert np.abs(flowed.values - k.values).max() < 1e-10 * k.values.max()

    def test_invalid_time(self, grid256):
        with pytest.raises(ValueError):
            cf.kernel_field(grid256, 0.0, (0.0, 0.0))


def test_recommended_side_length():
    assert recommended_side_length(1.0, 0.1) == pytest.approx(12 * math.sqrt(1.01))
