"""Diagonal Gaussian measures on the torus: covariance specs, KL sampling, equivalence checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralField, WavenumberLattice

__all__ = [
    "CovarianceSpec",
    "LaplacianPower",
    "GridWhite",
    "GaussianSampler",
    "EquivalenceReport",
    "trace",
    "equivalence_diagnostic",
]


class CovarianceSpec:
    """A covariance operator diagonal in the Fourier basis."""

    def eigenvalues(self, lattice: WavenumberLattice) -> np.ndarray:
        raise NotImplementedError

    def eigenvalue(self, lattice: WavenumberLattice, k) -> float:
        return float(self.eigenvalues(lattice)[lattice.index(*k)])


@dataclass(frozen=True)
class LaplacianPower(CovarianceSpec):
    """``scale * (-Laplacian + shift)^(-exponent)``, eigenvalues ``scale*(4 pi^2 |k|^2 + shift)^-exponent``.

    ``shift = 0`` removes the constants: the k = 0 eigenvalue is set to 0 and that
    mode is pinned to the mean in every draw.
    """

    scale: float = 1.0
    exponent: float = 2.0
    shift: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.shift < 0:
            raise ValueError(f"shift must be nonnegative, got {self.shift}")

    @property
    def constants_removed(self) -> bool:
        return self.shift == 0

    def eigenvalues(self, lattice: WavenumberLattice) -> np.ndarray:
        base = 4 * np.pi**2 * lattice.k_squared + self.shift
        if self.constants_removed:
            base = base.copy()
            base[lattice.zero_index] = np.inf
        return self.scale * base ** (-float(self.exponent))


@dataclass(frozen=True)
class GridWhite(CovarianceSpec):
    """White noise with variance ``sigma2`` at every grid point.

    On the truncated lattice this is a flat spectrum whose eigenvalues sum to
    ``sigma2``, i.e. ``sigma2 / num_modes`` per mode.
    """

    sigma2: float = 1e-4

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")

    def per_mode(self, lattice: WavenumberLattice) -> float:
        return self.sigma2 / lattice.num_modes

    def eigenvalues(self, lattice: WavenumberLattice) -> np.ndarray:
        return np.full(lattice.shape, self.per_mode(lattice))


def trace(spec: CovarianceSpec, lattice: WavenumberLattice) -> float:
    return float(np.sum(spec.eigenvalues(lattice)))


class GaussianSampler:
    """Karhunen-Loeve sampler for ``N(mean, spec)``; owns a seeded generator.

    Each pair ``{k, -k}`` gets independent real and imaginary parts of variance
    ``eigenvalue(k) / 2`` on one representative, mirrored by conjugation, so every
    draw is exactly Hermitian. The constant mode is a real normal.
    """

    def __init__(self, spec: CovarianceSpec, mean: SpectralField, seed: int = 0):
        self.spec = spec
        self.mean = mean
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        lat = mean.lattice
        lam = spec.eigenvalues(lat)
        if np.any(lam < 0):
            raise ValueError("covariance eigenvalues must be nonnegative")
        rep = lat.representatives
        self._rep_flat = np.flatnonzero(rep)
        # flat index of -k is the mirror of k's flat index
        self._neg_flat = lat.num_modes - 1 - self._rep_flat
        self._zero_flat = np.ravel_multi_index(lat.zero_index, lat.shape)
        self._half_sd = np.sqrt(lam.ravel()[self._rep_flat] / 2)
        self._zero_sd = float(np.sqrt(lam[lat.zero_index]))

    def clone(self, seed: int) -> GaussianSampler:
        return GaussianSampler(self.spec, self.mean, seed)

    def draw_fluctuations(self, size: int) -> np.ndarray:
        """``size`` zero-mean coefficient arrays, shape ``(size, 2M+1, 2M+1)``."""
        lat = self.mean.lattice
        m = len(self._rep_flat)
        out = np.zeros((size, lat.num_modes), dtype=complex)
        g = self.rng.standard_normal((size, 2 * m + 1))
        z = (g[:, :m] + 1j * g[:, m : 2 * m]) * self._half_sd
        out[:, self._rep_flat] = z
        out[:, self._neg_flat] = np.conj(z)
        out[:, self._zero_flat] = g[:, 2 * m] * self._zero_sd
        return out.reshape((size,) + lat.shape)

    def sample(self) -> SpectralField:
        fluct = self.draw_fluctuations(1)[0]
        return SpectralField(self.mean.lattice, self.mean.coeff + fluct, check=False)


@dataclass(frozen=True)
class EquivalenceReport:
    """Summability checks behind the Feldman-Hajek equivalence of prior and posteriors."""

    prior_noise_sum: float
    equivalent: bool | None
    equivalence_note: str
    noise_hs_sum: float
    noise_hs_summable: bool | None
    noise_note: str


def equivalence_diagnostic(
    prior: CovarianceSpec,
    noise: CovarianceSpec,
    s: float,
    lattice: WavenumberLattice,
) -> EquivalenceReport:
    """Partial sums of ``lambda_k / gamma_k^2`` and ``|k|^{2s} gamma_k``, plus analytic verdicts.

    For Laplacian-power pairs with exponents A (prior) and B (noise) the first sum
    converges in 2D iff ``2B < A - 1`` and the second iff ``2B - 2s > 2``.
    """
    lam = prior.eigenvalues(lattice)
    gam = noise.eigenvalues(lattice)
    active = lam > 0
    prior_noise_sum = float(np.sum(lam[active] / gam[active] ** 2))
    ks = lattice.k_squared
    weight = np.where(ks > 0, ks, 1.0) ** s
    noise_hs_sum = float(np.sum(weight * gam))

    if isinstance(prior, LaplacianPower) and isinstance(noise, LaplacianPower):
        a, b = float(prior.exponent), float(noise.exponent)
        equivalent = 2 * b < a - 1
        eq_note = f"2B={2 * b:g} {'<' if equivalent else '>='} A-1={a - 1:g}"
        if not (a > 1 and b > 1):
            eq_note += "; warning: A>1 and B>1 are needed for trace-class operators"
        summable = 2 * b - 2 * s > 2
        n_note = f"2B-2s={2 * b - 2 * s:g} {'>' if summable else '<='} 2"
    else:
        equivalent = None
        summable = None
        eq_note = "not applicable (non-trace-class continuum limit)" if isinstance(
            noise, GridWhite
        ) else "not applicable (no analytic rule for this pair)"
        n_note = eq_note
    return EquivalenceReport(prior_noise_sum, equivalent, eq_note, noise_hs_sum, summable, n_note)
