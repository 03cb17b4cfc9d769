import numpy as np
import pytest

from torusfilter.gaussian import LaplacianPower
from torusfilter.operators import AdvectionOperator
from torusfilter.spectral import SpectralField, partial_fourier_projection, sobolev_norm, translate
from torusfilter.velocity import ConstantVelocity, IntegrableDrift

from conftest import random_field

REF_C = (-0.5, -1.0)


@pytest.fixture
def op():
    return AdvectionOperator(ConstantVelocity(REF_C))


def test_time_zero_identity(op, small_lattice, rng):
    f = random_field(small_lattice, rng)
    np.testing.assert_array_equal(op.propagate(f, 0.0).coeff, f.coeff)
    np.testing.assert_array_equal(op.propagate_inverse(f, 0.0).coeff, f.coeff)


def test_constant_mode_untouched(op, small_lattice):
    f = SpectralField.constant(small_lattice, 2.0)
    for t in (0.3, 5.0, 17.1):
        np.testing.assert_array_equal(op.propagate(f, t).coeff, f.coeff)


def test_periodic_return(op, small_lattice, rng):
    f = random_field(small_lattice, rng)
    np.testing.assert_allclose(op.propagate(f, 2.0).coeff, f.coeff, atol=1e-13)


def test_roundtrip(op, small_lattice, rng):
    f = random_field(small_lattice, rng)
    back = op.propagate_inverse(op.propagate(f, 0.37), 0.37)
    assert np.max(np.abs(back.coeff - f.coeff)) < 1e-12


def test_single_mode_inverse_phase(op, small_lattice):
    f = SpectralField.from_modes(small_lattice, {(1, 2): 1.0})
    t = 0.3
    d = op.path.displacement(t)
    expected = np.exp(2j * np.pi * (1 * d[0] + 2 * d[1]))
    assert op.propagate_inverse(f, t)[(1, 2)] == pytest.approx(expected, abs=1e-15)


def test_equals_backward_translation(small_lattice, rng):
    op = AdvectionOperator(IntegrableDrift(REF_C, (0.5, 0.5)))
    f = random_field(small_lattice, rng)
    t = 1.3
    np.testing.assert_allclose(op.propagate(f, t).coeff, translate(f, -op.path.displacement(t)).coeff, atol=1e-14)


@pytest.mark.parametrize("s", [0, 1, 2])
def test_norm_preservation(op, small_lattice, rng, s):
    f = random_field(small_lattice, rng)
    assert abs(sobolev_norm(op.propagate(f, 0.731), s) - sobolev_norm(f, s)) < 1e-10


def test_group_property(op, small_lattice, rng):
    f = random_field(small_lattice, rng)
    two = op.propagate(op.propagate(f, 0.4), 1.1)
    np.testing.assert_allclose(two.coeff, op.propagate(f, 1.5).coeff, atol=1e-12)


def test_commutes_with_projection_and_covariance(op, small_lattice, rng):
    f = random_field(small_lattice, rng)
    t = 0.9
    a = partial_fourier_projection(op.propagate(f, t), 2, 3)
    b = op.propagate(partial_fourier_projection(f, 2, 3), t)
    np.testing.assert_allclose(a.coeff, b.coeff, atol=1e-14)
    lam = LaplacianPower(1.0, 2.0, 1.0).eigenvalues(small_lattice)
    c1 = lam * op.propagate(f, t).coeff
    c2 = op.propagate(SpectralField(small_lattice, lam * f.coeff), t).coeff
    np.testing.assert_allclose(c1, c2, atol=1e-14)
