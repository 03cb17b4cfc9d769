"""Forward solution operators for ``dv/dt + c(t).grad v = 0``; diagonal in Fourier space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralField, WavenumberLattice
from .velocity import VelocityPath

__all__ = ["AdvectionOperator"]


@dataclass(frozen=True, eq=False)
class AdvectionOperator:
    """``e^{-tL}`` for ``L = c(t).grad``: mode k picks up ``exp(-2 pi i k.D(t))``.

    The eigenvalues ``2 pi i k.c`` are purely imaginary, so the action is unitary
    on every H^s and the constant mode is left alone.
    """

    path: VelocityPath

    def phases(self, lattice: WavenumberLattice, t: float) -> np.ndarray:
        return np.exp(-2j * np.pi * lattice.dot(self.path.displacement(t)))

    def propagate(self, f: SpectralField, t: float) -> SpectralField:
        return SpectralField(f.lattice, f.coeff * self.phases(f.lattice, t), check=False)

    def propagate_inverse(self, f: SpectralField, t: float) -> SpectralField:
        return SpectralField(f.lattice, f.coeff * np.conj(self.phases(f.lattice, t)), check=False)
