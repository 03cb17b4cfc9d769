"""Exact Kalman filter/smoother for advection on T^2 with diagonal covariances.

Prior ``N(m0, C0)`` and noise ``N(0, Gamma)`` commute with the advection
operator, so every update acts mode by mode. The state stores the smoother mean
``m_n`` (law of v0 given n observations); the filter mean is always derived from
it by pushing forward through the flow.

Modes whose prior eigenvalue is zero (the constant mode of a prior with constants
removed) carry variance 0 and are never updated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian import CovarianceSpec, GridWhite
from .operators import AdvectionOperator
from .spectral import SpectralField, WavenumberLattice
from .velocity import ConstantVelocity

__all__ = [
    "AssimilationState",
    "initial_state",
    "assimilate_step",
    "assimilate",
    "smoother_closed_form",
    "filter_mean",
    "closed_form_variance",
    "WhiteNoiseMisfit",
    "misfit",
    "posterior_log_density_ratio",
]


@dataclass(frozen=True, eq=False)
class AssimilationState:
    n: int
    smoother_mean: SpectralField
    variance: np.ndarray
    model_op: AdvectionOperator
    dt: float

    @property
    def lattice(self) -> WavenumberLattice:
        return self.smoother_mean.lattice

    @property
    def time(self) -> float:
        return self.n * self.dt


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def initial_state(
    m0: SpectralField, prior: CovarianceSpec, model_op: AdvectionOperator, dt: float
) -> AssimilationState:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return AssimilationState(0, m0, _readonly(prior.eigenvalues(m0.lattice)), model_op, dt)


def filter_mean(state: AssimilationState) -> SpectralField:
    """Mean of the current state ``v_n`` given the data: ``e^{-t_n L} m_n``."""
    return state.model_op.propagate(state.smoother_mean, state.time)


def assimilate_step(
    state: AssimilationState, y: SpectralField, gamma: CovarianceSpec
) -> AssimilationState:
    """One predict/analyse cycle in filter coordinates.

    Prediction advances the filter mean from ``t_n`` to ``t_{n+1}``; the analysis
    uses gain ``g = v / (gamma + v)``. The posterior variance ``v - g v`` is
    evaluated as ``g * gamma``, which is the same number without cancellation.
    """
    lat = state.lattice
    if y.lattice != lat:
        raise ValueError("observation lattice does not match the state lattice")
    op = state.model_op
    t_now, t_next = state.time, (state.n + 1) * state.dt
    step = lat.dot(op.path.displacement(t_next) - op.path.displacement(t_now))
    predicted = filter_mean(state).coeff * np.exp(-2j * np.pi * step)
    gam = gamma.eigenvalues(lat)
    v = state.variance
    gain = v / (gam + v)
    analysed = predicted - gain * (predicted - y.coeff)
    new_filter = SpectralField(lat, analysed, check=False)
    return AssimilationState(
        state.n + 1,
        op.propagate_inverse(new_filter, t_next),
        _readonly(gain * gam),
        op,
        state.dt,
    )


def assimilate(
    state: AssimilationState, observations: Sequence[SpectralField], gamma: CovarianceSpec
) -> AssimilationState:
    for y in observations:
        state = assimilate_step(state, y, gamma)
    return state


def closed_form_variance(prior: CovarianceSpec, gamma: CovarianceSpec, lattice, n: int) -> np.ndarray:
    """``(n / gamma_k + 1 / lambda_k)^{-1}``, zero where ``lambda_k = 0``."""
    lam = prior.eigenvalues(lattice)
    gam = gamma.eigenvalues(lattice)
    with np.errstate(divide="ignore"):
        return np.where(lam > 0, 1.0 / (n / gam + 1.0 / np.where(lam > 0, lam, 1.0)), 0.0)


def smoother_closed_form(
    m0: SpectralField,
    prior: CovarianceSpec,
    gamma: CovarianceSpec,
    model_op: AdvectionOperator,
    observations: Sequence[SpectralField],
    dt: float,
    times: Sequence[float] | None = None,
) -> AssimilationState:
    """Smoother after all observations, as a phase-aligned weighted average.

    ``m_n(k) = (r_k m0(k) + sum_l exp(2 pi i k.D(t_l)) y_l(k)) / (n + r_k)``
    with ``r_k = gamma_k / lambda_k``. Observation times default to ``t_l = l dt``;
    explicit ``times`` may come in any order since the sum is symmetric.
    """
    n = len(observations)
    if n == 0:
        raise ValueError("observation sequence is empty")
    if times is None:
        times = [l * dt for l in range(1, n + 1)]
    elif len(times) != n:
        raise ValueError(f"got {len(times)} times for {n} observations")
    lat = m0.lattice
    lam = prior.eigenvalues(lat)
    gam = gamma.eigenvalues(lat)
    pinned = lam <= 0
    ratio = gam / np.where(pinned, 1.0, lam)
    total = np.zeros(lat.shape, dtype=complex)
    for t, y in zip(times, observations):
        if y.lattice != lat:
            raise ValueError("observation lattice does not match the prior mean lattice")
        total += np.conj(model_op.phases(lat, t)) * y.coeff
    mean = np.where(pinned, m0.coeff, (ratio * m0.coeff + total) / (n + ratio))
    return AssimilationState(
        n,
        SpectralField(lat, mean, check=False),
        _readonly(closed_form_variance(prior, gamma, lat, n)),
        model_op,
        dt,
    )


class WhiteNoiseMisfit:
    """Cumulative data misfit ``Phi(v; c) = 1/2 sum_l sum_k |y_l(k) - e^{-2 pi i k.c t_l} v(k)|^2 / gamma``.

    Evaluated through sufficient statistics: for fixed c the misfit is a quadratic
    in v with linear term ``S_k(c) = sum_l exp(2 pi i k.c t_l) y_l(k)``, so each
    evaluation after :meth:`statistic` costs one pass over the lattice.
    """

    def __init__(self, observations: Sequence[SpectralField], gamma: CovarianceSpec, dt: float,
                 lattice: WavenumberLattice | None = None):
        if not isinstance(gamma, GridWhite):
            raise NotImplementedError("the misfit functional supports white (GridWhite) noise only")
        if observations:
            lattice = observations[0].lattice
        if lattice is None:
            raise ValueError("lattice is required when there are no observations")
        self.lattice = lattice
        self.n = len(observations)
        self.dt = float(dt)
        self.gamma = gamma.per_mode(lattice)
        if self.n:
            self._y = np.stack([y.coeff for y in observations])
        else:
            self._y = np.zeros((0,) + lattice.shape, dtype=complex)
        self._sum_sq = float(np.sum(np.abs(self._y) ** 2))
        self._times = self.dt * np.arange(1, self.n + 1)

    def statistic(self, c) -> np.ndarray:
        if self.n == 0:
            return np.zeros(self.lattice.shape, dtype=complex)
        kc = self.lattice.dot(c)
        phase = np.exp(2j * np.pi * self._times[:, None, None] * kc[None])
        return np.einsum("lij,lij->ij", phase, self._y)

    def phi_from_statistic(self, v: np.ndarray, stat: np.ndarray) -> float:
        quad = self._sum_sq - 2.0 * np.real(np.vdot(v, stat)) + self.n * np.vdot(v, v).real
        return 0.5 * quad / self.gamma

    def phi(self, v: SpectralField | np.ndarray, c) -> float:
        coeff = v.coeff if isinstance(v, SpectralField) else v
        return self.phi_from_statistic(coeff, self.statistic(c))

    def phi_difference(self, v_new: np.ndarray, v_old: np.ndarray, stat: np.ndarray) -> float:
        """``Phi(v_new) - Phi(v_old)`` at fixed c, without forming either term."""
        dv = v_new - v_old
        lin = -2.0 * np.real(np.vdot(dv, stat))
        quad = self.n * (np.vdot(v_new, v_new).real - np.vdot(v_old, v_old).real)
        return 0.5 * (lin + quad) / self.gamma


def misfit(v: SpectralField, c, observations: Sequence[SpectralField], gamma: CovarianceSpec, dt: float) -> float:
    """Direct finite-sum evaluation of the misfit (no sufficient statistics)."""
    if not isinstance(gamma, GridWhite):
        raise NotImplementedError("the misfit functional supports white (GridWhite) noise only")
    op = AdvectionOperator(ConstantVelocity(c))
    g = gamma.per_mode(v.lattice)
    total = 0.0
    for l, y in enumerate(observations, start=1):
        r = y.coeff - op.propagate(v, l * dt).coeff
        total += float(np.sum(np.abs(r) ** 2))
    return 0.5 * total / g


def posterior_log_density_ratio(
    v_a: SpectralField,
    v_b: SpectralField,
    c,
    observations: Sequence[SpectralField],
    gamma: CovarianceSpec,
    dt: float,
) -> float:
    """``Phi(v_a) - Phi(v_b)``; the log posterior ratio ``log p(v_b|Y)/p(v_a|Y)`` up to the prior."""
    if not isinstance(gamma, GridWhite):
        raise NotImplementedError("the misfit functional supports white (GridWhite) noise only")
    if not observations:
        return 0.0
    return misfit(v_a, c, observations, gamma, dt) - misfit(v_b, c, observations, gamma, dt)
