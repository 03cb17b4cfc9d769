import numpy as np
import pytest

from torusfilter.gaussian import (
    GaussianSampler,
    GridWhite,
    LaplacianPower,
    equivalence_diagnostic,
    trace,
)
from torusfilter.spectral import DEFAULT_LATTICE, SpectralField, WavenumberLattice, to_grid

from conftest import random_field


class TestSpecs:
    def test_laplacian_eigenvalues(self):
        lat = WavenumberLattice(2, 5)
        spec = LaplacianPower(2.0, 1.5, 3.0)
        k = (1, 2)
        assert spec.eigenvalue(lat, k) == pytest.approx(2.0 * (4 * np.pi**2 * 5 + 3.0) ** -1.5)

    def test_constants_removed(self):
        lam = LaplacianPower(1.0, 2.0, 0.0).eigenvalues(DEFAULT_LATTICE)
        assert lam[DEFAULT_LATTICE.zero_index] == 0.0
        assert np.all(np.delete(lam.ravel(), lam.size // 2) > 0)

    def test_validation(self):
        with pytest.raises(ValueError, match="scale"):
            LaplacianPower(0.0)
        with pytest.raises(ValueError, match="shift"):
            LaplacianPower(1.0, 2.0, -1.0)
        with pytest.raises(ValueError, match="sigma2"):
            GridWhite(0.0)

    def test_grid_white_flat(self):
        g = GridWhite(1e-4)
        lam = g.eigenvalues(DEFAULT_LATTICE)
        assert np.all(lam == lam[0, 0])


class TestTrace:
    def test_brute_force_laplacian(self):
        lat = WavenumberLattice(1, 3)
        expected = 0.0
        for k1 in (-1, 0, 1):
            for k2 in (-1, 0, 1):
                expected += (4 * np.pi**2 * (k1 * k1 + k2 * k2) + 1.0) ** -2
        assert trace(LaplacianPower(1, 2, 1), lat) == pytest.approx(expected, rel=1e-14)

    def test_scale_linear(self):
        assert trace(LaplacianPower(2.0, 2.0, 1.0), DEFAULT_LATTICE) == pytest.approx(
            2 * trace(LaplacianPower(1.0, 2.0, 1.0), DEFAULT_LATTICE)
        )

    def test_grid_white_trace_is_pointwise_variance(self):
        assert trace(GridWhite(1e-4), DEFAULT_LATTICE) == pytest.approx(1e-4, rel=1e-12)


class TestSampler:
    def test_tiny_scale_returns_mean(self, small_lattice, rng):
        mean = random_field(small_lattice, rng)
        s = GaussianSampler(LaplacianPower(1e-300), mean, seed=0).sample()
        assert np.max(np.abs(s.coeff - mean.coeff)) < 1e-140

    def test_exact_hermitian(self):
        f = GaussianSampler(LaplacianPower(), SpectralField.zeros(DEFAULT_LATTICE), seed=4).sample()
        assert np.array_equal(f.coeff, np.conj(f.coeff[::-1, ::-1]))
        assert f.coeff[DEFAULT_LATTICE.zero_index].imag == 0.0

    def test_grid_white_pointwise_variance(self):
        sampler = GaussianSampler(GridWhite(1e-4), SpectralField.zeros(DEFAULT_LATTICE), seed=1)
        vals = np.array([to_grid(SpectralField(DEFAULT_LATTICE, c, check=False))[5, 9]
                         for c in sampler.draw_fluctuations(10_000)])
        assert abs(vals.var() / 1e-4 - 1) < 0.05

    @pytest.mark.parametrize("k", [(1, 0), (2, 3)])
    def test_laplacian_mode_variance(self, k):
        spec = LaplacianPower(1.0, 2.0, 1.0)
        lat = DEFAULT_LATTICE
        draws = GaussianSampler(spec, SpectralField.zeros(lat), seed=2).draw_fluctuations(10_000)
        emp = np.mean(np.abs(draws[:, lat.index(*k)[0], lat.index(*k)[1]]) ** 2)
        assert abs(emp / spec.eigenvalue(lat, k) - 1) < 0.05

    def test_constant_mode_pinned(self):
        lat = DEFAULT_LATTICE
        mean = SpectralField.constant(lat, 0.0)
        draws = GaussianSampler(LaplacianPower(1, 2, 0), mean, seed=0).draw_fluctuations(100)
        assert np.all(draws[:, lat.zero_index[0], lat.zero_index[1]] == 0)

    def test_clone_reproducible(self, small_lattice):
        s = GaussianSampler(LaplacianPower(), SpectralField.zeros(small_lattice), seed=5)
        a = s.clone(11).sample()
        b = s.clone(11).sample()
        np.testing.assert_array_equal(a.coeff, b.coeff)

    def test_sample_mean_rate(self, small_lattice):
        mean = SpectralField.from_modes(small_lattice, {(1, 1): 0.3})
        s = GaussianSampler(LaplacianPower(1.0, 1.0, 1.0), mean, seed=8)
        sizes = [100, 1000, 10_000]
        errs = []
        for m in sizes:
            d = s.draw_fluctuations(m).mean(axis=0)
            errs.append(np.sqrt(np.sum(np.abs(d) ** 2)))
        slope = np.polyfit(np.log(sizes), np.log(errs), 1)[0]
        assert -0.75 < slope < -0.25

    def test_cross_covariance_vanishes(self, small_lattice):
        lat = small_lattice
        spec = LaplacianPower(1.0, 1.0, 1.0)
        draws = GaussianSampler(spec, SpectralField.zeros(lat), seed=3).draw_fluctuations(20_000)
        a = draws[:, lat.index(1, 0)[0], lat.index(1, 0)[1]]
        b = draws[:, lat.index(0, 2)[0], lat.index(0, 2)[1]]
        cross = np.mean(a * np.conj(b))
        se = np.sqrt(spec.eigenvalue(lat, (1, 0)) * spec.eigenvalue(lat, (0, 2)) / 20_000)
        assert abs(cross) < 5 * se


class TestEquivalence:
    def test_equivalent_pair(self):
        r = equivalence_diagnostic(LaplacianPower(1, 4, 1), LaplacianPower(1, 1, 1), 0.0, DEFAULT_LATTICE)
        assert r.equivalent is True
        assert np.isfinite(r.prior_noise_sum)

    def test_singular_pair(self):
        r = equivalence_diagnostic(LaplacianPower(1, 2, 1), LaplacianPower(1, 1, 1), 0.0, DEFAULT_LATTICE)
        assert r.equivalent is False

    def test_noise_summability(self):
        r = equivalence_diagnostic(LaplacianPower(1, 4, 1), LaplacianPower(1, 2, 1), 0.5, DEFAULT_LATTICE)
        assert r.noise_hs_summable is True
        r = equivalence_diagnostic(LaplacianPower(1, 4, 1), LaplacianPower(1, 2, 1), 1.0, DEFAULT_LATTICE)
        assert r.noise_hs_summable is False

    def test_grid_white_not_applicable(self):
        r = equivalence_diagnostic(LaplacianPower(1, 2, 0), GridWhite(), 0.0, DEFAULT_LATTICE)
        assert r.equivalent is None and r.noise_hs_summable is None
        assert "not applicable" in r.equivalence_note
        assert np.isfinite(r.prior_noise_sum) and np.isfinite(r.noise_hs_sum)

    def test_partial_sum_brute_force(self):
        lat = WavenumberLattice(1, 3)
        prior, noise = LaplacianPower(1, 4, 1), LaplacianPower(1, 1, 1)
        expected = sum(
            prior.eigenvalue(lat, (a, b)) / noise.eigenvalue(lat, (a, b)) ** 2
            for a in (-1, 0, 1) for b in (-1, 0, 1)
        )
        r = equivalence_diagnostic(prior, noise, 0.0, lat)
        assert r.prior_noise_sum == pytest.approx(expected, rel=1e-13)
