import numpy as np
import pytest

from torusfilter.asymptotics import (
    LimitTarget,
    brownian_moment_bound,
    brownian_moment_closed_form,
    brownian_moment_oracle,
    filter_error_curve,
    fit_rate,
    geometric_sum_closed_form,
    geometric_sum_oracle,
    smoother_error_curve,
)
from torusfilter.gaussian import GridWhite, LaplacianPower
from torusfilter.spectral import DEFAULT_LATTICE, partial_fourier_projection, sobolev_norm, translate
from torusfilter.truthgen import Scenario, ScenarioConfig, reference_truth_ic

PRIOR = LaplacianPower(1.0, 2.0, 0.0)
NOISE = GridWhite(1e-4)


@pytest.fixture(scope="module")
def u():
    return reference_truth_ic()


def _brownian_expected(u, eps, dt, n):
    """Analytic RMS errors of the noiseless smoother against <u> and against u.

    Uses E exp(2 pi i k.eps W(t)) = exp(-2 pi^2 eps^2 |k|^2 t) and the double
    geometric second moment; observation noise and prior shrinkage are ignored.
    """
    lat = u.lattice
    amp2 = np.abs(u.coeff) ** 2
    to_avg = to_truth = 0.0
    for (i, j) in zip(*np.nonzero(amp2)):
        k = (int(lat.k1[i, j]), int(lat.k2[i, j]))
        second = brownian_moment_closed_form(k, eps, dt, n) / n**2
        a = 2 * np.pi**2 * eps**2 * (k[0] ** 2 + k[1] ** 2) * dt
        first = np.mean(np.exp(-a * np.arange(1, n + 1)))
        to_avg += amp2[i, j] * second
        to_truth += amp2[i, j] * (1 - 2 * first + second)
    return np.sqrt(to_avg), np.sqrt(to_truth)


class TestTargets:
    def test_kinds(self, u):
        assert np.array_equal(LimitTarget.truth(u).field.coeff, u.coeff)
        assert np.array_equal(LimitTarget.projection(u, 2, 2).field.coeff, partial_fourier_projection(u, 2, 2).coeff)
        assert sobolev_norm(LimitTarget.average(u).field) == 0.0
        assert np.array_equal(LimitTarget.shifted(u, (0.5, 0.5)).field.coeff, translate(u, (0.5, 0.5)).coeff)


class TestFit:
    def test_exact_power_law(self):
        n = np.array([8, 16, 32, 64, 128])
        fit = fit_rate(n, 3.0 * n**-0.5)
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)
        assert fit.r2 == pytest.approx(1.0)

    def test_discard_ignores_transient(self):
        n = np.array([8, 16, 32, 64, 128])
        e = n**-1.0
        e[:2] = 100.0
        assert fit_rate(n, e, discard=2).slope == pytest.approx(-1.0, abs=1e-12)

    def test_squared_fit(self):
        n = np.array([8, 16, 32, 64, 128])
        fit = fit_rate(n, n**-0.7)
        assert fit.squared().slope == pytest.approx(-1.4, abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="two checkpoints"):
            fit_rate([8, 16, 32], [1, 0.5, 0.2])

    def test_checkpoints_must_increase(self, u):
        cfg = ScenarioConfig(Scenario("none"), 0.1, 10, u)
        with pytest.raises(ValueError, match="increasing"):
            smoother_error_curve(cfg, PRIOR, NOISE, LimitTarget.truth(u), checkpoints=(8, 8, 16), seeds=1)


@pytest.mark.slow
class TestCurves:
    def test_exact_data_exact_prior_mean(self, u):
        cfg = ScenarioConfig(Scenario("none"), 0.1, 64, u, obs_noise=None)
        fit = smoother_error_curve(cfg, PRIOR, NOISE, LimitTarget.truth(u), checkpoints=(8, 16, 32, 64),
                                   seeds=2, m0=u)
        assert np.all(fit.errors < 1e-12)

    def test_seed_aggregation_is_rms(self, u):
        cfg = ScenarioConfig(Scenario("none"), 0.1, 32, u)
        fit = filter_error_curve(cfg, PRIOR, NOISE, checkpoints=(8, 16, 32), seeds=3, discard=1)
        np.testing.assert_allclose(fit.errors, np.sqrt(np.mean(fit.errors_by_seed**2, axis=0)))
        assert np.all(fit.stderr > 0)

    def test_brownian_curve_matches_analytic_expectation(self, u):
        cps = (64, 256, 1024)
        cfg = ScenarioConfig(Scenario("brownian", epsilon=0.1), 0.1, 1024, u)
        fit = smoother_error_curve(cfg, PRIOR, NOISE, LimitTarget.average(u), checkpoints=cps, seeds=20,
                                   discard=0)
        expected = np.array([_brownian_expected(u, 0.1, 0.1, n)[0] for n in cps])
        # per-seed spread is large; 20 seeds pin the RMS to roughly 15%
        np.testing.assert_allclose(fit.errors, expected, rtol=0.2)

    def test_order_switching_vanishing_shift(self, u):
        # fixed n: error against u shrinks as the per-step shift goes to zero
        errs = []
        for scale in (1e-2, 1e-3, 1e-4):
            shift = (scale / np.e, scale / np.pi)
            cfg = ScenarioConfig(Scenario("const_irrational", shift=shift), 0.1, 256, u)
            errs.append(smoother_error_curve(cfg, PRIOR, NOISE, LimitTarget.truth(u), checkpoints=(64, 128, 256),
                                             seeds=2, discard=0).errors[-1])
        assert errs[0] > errs[1] > errs[2]

    def test_order_switching_rational_plateau(self, u):
        # fixed rational shift (1/2, 1/3): the error against u levels off at ||u - F_(2,3)u||
        cfg = ScenarioConfig(Scenario("const_rational", shift=(0.5, 1 / 3)), 0.1, 1024, u)
        fit = smoother_error_curve(cfg, PRIOR, NOISE, LimitTarget.truth(u), checkpoints=(256, 512, 1024),
                                   seeds=2, discard=0)
        plateau = sobolev_norm(u - partial_fourier_projection(u, 2, 3))
        assert abs(fit.errors[-1] / plateau - 1) < 0.2

    @pytest.mark.parametrize("kind,good,bad", [
        ("const_rational", "projection", "truth"),
        ("const_irrational", "average", "truth"),
        ("integrable", "shifted", "truth"),
        ("brownian", "average", "truth"),
    ])
    def test_wrong_target_separation(self, u, kind, good, bad):
        make = {
            "truth": lambda: LimitTarget.truth(u),
            "projection": lambda: LimitTarget.projection(u, 2, 2),
            "average": lambda: LimitTarget.average(u),
            "shifted": lambda: LimitTarget.shifted(u, (0.5, 0.5)),
        }
        cfg = ScenarioConfig(Scenario(kind), 0.1, 1024, u)
        kw = dict(checkpoints=(256, 512, 1024), seeds=10, discard=0)
        e_good = smoother_error_curve(cfg, PRIOR, NOISE, make[good](), **kw).errors[-1]
        e_bad = smoother_error_curve(cfg, PRIOR, NOISE, make[bad](), **kw).errors[-1]
        assert e_bad >= 5 * e_good

    def test_brownian_separation_expected_below_five(self, u):
        # the analytic ratio at eps=0.1, n=1024 sits just under the factor-5 separation
        avg, truth = _brownian_expected(u, 0.1, 0.1, 1024)
        assert 4.5 < truth / avg < 5.0


class TestGeometricSum:
    def test_half_cancels(self):
        g = geometric_sum_oracle((1, 0), (5.0, 0.0), 0.1, 2)
        assert abs(g.value) < 1e-15 and not g.resonant

    def test_third_closed_form_zero(self):
        g = geometric_sum_oracle((1, 0), (1 / 0.3, 0.0), 0.1, 3)
        assert g.closed_form == pytest.approx(0.0, abs=1e-28)
        assert g.modulus_sq == pytest.approx(0.0, abs=1e-28)

    def test_resonant(self):
        g = geometric_sum_oracle((2, 4), (5.0, 5.0), 0.1, 17)
        assert g.resonant and abs(g.value) == 17 and g.closed_form == 289

    def test_sweep(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            k = rng.integers(-15, 16, 2)
            dc = rng.uniform(-5, 5, 2)
            n = int(rng.integers(1, 3000))
            g = geometric_sum_oracle(k, dc, 0.1, n)
            assert abs(g.modulus_sq - g.closed_form) <= 1e-8 * max(g.closed_form, 1.0)

    def test_closed_form_small_x(self):
        assert geometric_sum_closed_form(1e-9, 10) == pytest.approx(100.0, rel=1e-6)


class TestBrownianMoment:
    def test_single_term(self):
        b = brownian_moment_oracle((1, 0), 0.3, 0.1, 1, 50)
        assert b.estimate == pytest.approx(1.0, abs=1e-14)
        assert brownian_moment_closed_form((1, 0), 0.3, 0.1, 1) == 1.0

    def test_large_epsilon_decorrelates(self):
        assert brownian_moment_closed_form((1, 0), 50.0, 0.1, 40) == pytest.approx(40.0, rel=1e-9)
        b = brownian_moment_oracle((1, 0), 50.0, 0.1, 40, 4000, seed=1)
        assert abs(b.zscore) < 4

    def test_closed_form_vs_double_sum(self):
        k, eps, dt, n = (2, 1), 0.07, 0.1, 60
        a = 2 * np.pi**2 * eps**2 * 5 * dt
        l = np.arange(n)
        direct = np.exp(-a * np.abs(l[:, None] - l[None, :])).sum()
        assert brownian_moment_closed_form(k, eps, dt, n) == pytest.approx(direct, rel=1e-12)

    def test_reference_case(self):
        b = brownian_moment_oracle((1, 0), 0.1, 0.1, 100, 1000, seed=0)
        assert abs(b.zscore) <= 3
        assert b.closed_form <= b.bound

    def test_bound_holds_for_all_k(self):
        for k in [(1, 0), (1, 1), (3, 2)]:
            for n in (10, 100, 1000):
                assert brownian_moment_closed_form(k, 0.1, 0.1, n) <= brownian_moment_bound(0.1, 0.1, n)

    def test_epsilon_positive(self):
        with pytest.raises(ValueError, match="epsilon"):
            brownian_moment_oracle((1, 0), 0.0, 0.1, 10, 10)
