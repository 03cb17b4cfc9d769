"""Numerical tolerances shared by invariant checks across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    grid_imag: float = 1e-12
    roundtrip: float = 1e-12
    parseval_rel: float = 1e-10
    norm_preservation: float = 1e-10
    recursion_vs_closed: float = 1e-10
    geometric_sum_rel: float = 1e-8
    degenerate_mode: float = 1e-12
    time_grid: float = 1e-9


TOL = Tolerances()
