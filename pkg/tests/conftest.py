import numpy as np
import pytest

from torusfilter.spectral import SpectralField, WavenumberLattice


def random_field(lattice, rng, scale=1.0, decay=0.0):
    """Hermitian-symmetric random field, built independently of the package sampler."""
    c = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
    c = 0.5 * (c + np.conj(c[::-1, ::-1]))
    if decay:
        c = c / (1.0 + lattice.k_squared) ** decay
    return SpectralField(lattice, scale * c)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_lattice():
    return WavenumberLattice(max_mode=4, grid_size=10)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
