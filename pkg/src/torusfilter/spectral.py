"""Truncated Fourier representation of real fields on the unit torus T^2.

A field is stored by its complex coefficients ``coeff[k1 + M, k2 + M]`` on the
symmetric lattice ``|k1|, |k2| <= M`` with basis ``phi_k(x) = exp(2 pi i k.x)``.
Both members of every conjugate pair are stored, which keeps invariant checks
simple at the cost of half the memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .tolerances import TOL

__all__ = [
    "WavenumberLattice",
    "SpectralField",
    "NormParams",
    "DEFAULT_LATTICE",
    "sobolev_norm",
    "partial_fourier_projection",
    "spatial_average",
    "to_grid",
    "from_grid",
    "translate",
    "hermitian_error",
]


@dataclass(frozen=True)
class WavenumberLattice:
    """Modes ``k = (k1, k2)`` with ``|k1|, |k2| <= max_mode`` sampled on a square grid."""

    max_mode: int = 15
    grid_size: int = 32

    def __post_init__(self):
        if int(self.max_mode) != self.max_mode or self.max_mode < 1:
            raise ValueError(f"max_mode must be an integer >= 1, got {self.max_mode}")
        if self.grid_size < 2 * self.max_mode + 1:
            raise ValueError(
                f"grid_size={self.grid_size} aliases the lattice; need >= {2 * self.max_mode + 1}"
            )

    @property
    def width(self) -> int:
        return 2 * self.max_mode + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.width, self.width)

    @property
    def num_modes(self) -> int:
        return self.width * self.width

    @cached_property
    def k1(self) -> np.ndarray:
        k = np.arange(-self.max_mode, self.max_mode + 1)
        return np.broadcast_to(k[:, None], self.shape).copy()

    @cached_property
    def k2(self) -> np.ndarray:
        k = np.arange(-self.max_mode, self.max_mode + 1)
        return np.broadcast_to(k[None, :], self.shape).copy()

    @cached_property
    def k_squared(self) -> np.ndarray:
        return (self.k1**2 + self.k2**2).astype(float)

    @cached_property
    def zero_index(self) -> tuple[int, int]:
        return (self.max_mode, self.max_mode)

    @cached_property
    def representatives(self) -> np.ndarray:
        """Boolean mask choosing one member of each pair ``{k, -k}``, ``k != 0``."""
        return (self.k1 > 0) | ((self.k1 == 0) & (self.k2 > 0))

    def index(self, k1: int, k2: int) -> tuple[int, int]:
        if abs(k1) > self.max_mode or abs(k2) > self.max_mode:
            raise KeyError(f"mode ({k1}, {k2}) outside lattice with max_mode={self.max_mode}")
        return (k1 + self.max_mode, k2 + self.max_mode)

    def dot(self, vec) -> np.ndarray:
        """``k . vec`` for every lattice mode."""
        v = np.asarray(vec, dtype=float)
        return self.k1 * v[0] + self.k2 * v[1]

    def grid_points(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.grid_size) / self.grid_size
        return np.meshgrid(x, x, indexing="ij")


DEFAULT_LATTICE = WavenumberLattice()


@dataclass(frozen=True)
class NormParams:
    s: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("s", "kappa"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")


def hermitian_error(coeff: np.ndarray) -> float:
    """Max violation of ``coeff(-k) = conj(coeff(k))``."""
    return float(np.max(np.abs(coeff - np.conj(coeff[::-1, ::-1]))))


class SpectralField:
    """Immutable real field on T^2 given by Hermitian-symmetric Fourier coefficients."""

    __slots__ = ("lattice", "coeff")

    def __init__(self, lattice: WavenumberLattice, coeff, *, check: bool = True):
        arr = np.array(coeff, dtype=complex)
        if arr.shape != lattice.shape:
            raise ValueError(f"coefficient shape {arr.shape} does not match lattice {lattice.shape}")
        if check:
            scale = max(1.0, float(np.max(np.abs(arr))))
            err = hermitian_error(arr)
            if err > TOL.hermitian * scale:
                raise ValueError(f"coefficients are not Hermitian symmetric (error {err:.3e})")
        arr.flags.writeable = False
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "coeff", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    @classmethod
    def zeros(cls, lattice: WavenumberLattice = DEFAULT_LATTICE) -> SpectralField:
        return cls(lattice, np.zeros(lattice.shape, dtype=complex), check=False)

    @classmethod
    def constant(cls, lattice: WavenumberLattice, value: float) -> SpectralField:
        c = np.zeros(lattice.shape, dtype=complex)
        c[lattice.zero_index] = value
        return cls(lattice, c, check=False)

    @classmethod
    def from_modes(cls, lattice: WavenumberLattice, modes: dict) -> SpectralField:
        """Build from ``{(k1, k2): amplitude}``; the conjugate partner is filled in."""
        c = np.zeros(lattice.shape, dtype=complex)
        for (k1, k2), amp in modes.items():
            if (k1, k2) == (0, 0):
                if np.imag(amp) != 0:
                    raise ValueError("constant mode must be real")
                c[lattice.zero_index] += amp
                continue
            c[lattice.index(k1, k2)] += amp
            c[lattice.index(-k1, -k2)] += np.conj(amp)
        return cls(lattice, c)

    def __getitem__(self, k) -> complex:
        return complex(self.coeff[self.lattice.index(*k)])

    def _check_same(self, other: SpectralField):
        if self.lattice != other.lattice:
            raise ValueError("fields live on different lattices")

    def __add__(self, other: SpectralField) -> SpectralField:
        self._check_same(other)
        return SpectralField(self.lattice, self.coeff + other.coeff, check=False)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._check_same(other)
        return SpectralField(self.lattice, self.coeff - other.coeff, check=False)

    def __mul__(self, scalar: float) -> SpectralField:
        if np.iscomplexobj(scalar) and np.imag(scalar) != 0:
            raise ValueError("multiplying by a non-real scalar breaks realness")
        return SpectralField(self.lattice, self.coeff * float(np.real(scalar)), check=False)

    __rmul__ = __mul__

    def __neg__(self) -> SpectralField:
        return SpectralField(self.lattice, -self.coeff, check=False)

    def __repr__(self) -> str:
        return f"SpectralField(max_mode={self.lattice.max_mode}, L2={sobolev_norm(self, 0):.6g})"


def sobolev_norm(f: SpectralField, s: float = 0.0) -> float:
    """H^s norm with weight ``|k|^{2s}`` off the constant mode and weight 1 on it."""
    lat = f.lattice
    weight = np.where(lat.k_squared > 0, lat.k_squared, 1.0) ** s
    weight[lat.zero_index] = 1.0
    return float(np.sqrt(np.sum(weight * np.abs(f.coeff) ** 2)))


def partial_fourier_projection(f: SpectralField, p: int, q: int) -> SpectralField:
    """Keep modes with ``k1 % p == 0`` and ``k2 % q == 0``."""
    if p <= 0 or q <= 0:
        raise ValueError(f"p and q must be positive, got ({p}, {q})")
    lat = f.lattice
    keep = (lat.k1 % p == 0) & (lat.k2 % q == 0)
    return SpectralField(lat, np.where(keep, f.coeff, 0), check=False)


def spatial_average(f: SpectralField) -> float:
    return float(np.real(f.coeff[f.lattice.zero_index]))


def _fft_slots(lat: WavenumberLattice):
    n = lat.grid_size
    return lat.k1 % n, lat.k2 % n


def to_grid(f: SpectralField) -> np.ndarray:
    """Values ``f(j1/N, j2/N)`` on the ``N x N`` grid, first axis along x1."""
    lat = f.lattice
    n = lat.grid_size
    full = np.zeros((n, n), dtype=complex)
    i1, i2 = _fft_slots(lat)
    full[i1, i2] = f.coeff
    values = np.fft.ifft2(full) * (n * n)
    imag = float(np.max(np.abs(values.imag)))
    scale = max(1.0, float(np.max(np.abs(values.real))))
    if imag > TOL.grid_imag * scale * n:
        raise ArithmeticError(f"inverse transform left imaginary residue {imag:.3e}")
    return values.real.copy()


def from_grid(values, lattice: WavenumberLattice | None = None) -> SpectralField:
    """Project grid values onto the lattice; exact inverse of :func:`to_grid`."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {v.shape}")
    if lattice is None:
        n = v.shape[0]
        lattice = WavenumberLattice(max_mode=(n - 1) // 2, grid_size=n)
    if v.shape[0] != lattice.grid_size:
        raise ValueError(f"grid of size {v.shape[0]} does not match lattice grid_size {lattice.grid_size}")
    spec = np.fft.fft2(v) / lattice.grid_size**2
    i1, i2 = _fft_slots(lattice)
    c = spec[i1, i2]
    c = 0.5 * (c + np.conj(c[::-1, ::-1]))
    return SpectralField(lattice, c, check=False)


def translate(f: SpectralField, shift) -> SpectralField:
    """``f(. + shift)``: multiplies mode k by ``exp(2 pi i k.shift)``."""
    phase = np.exp(2j * np.pi * f.lattice.dot(shift))
    return SpectralField(f.lattice, f.coeff * phase, check=False)
