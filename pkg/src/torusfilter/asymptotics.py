"""Large-data experiments: error curves against limit objects, rate fits, closed-form oracles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gaussian import CovarianceSpec
from .kalman import assimilate_step, filter_mean, initial_state
from .operators import AdvectionOperator
from .spectral import (
    SpectralField,
    partial_fourier_projection,
    sobolev_norm,
    spatial_average,
    translate,
)
from .truthgen import ScenarioConfig, generate_observations, truth_path, truth_trajectory

__all__ = [
    "DEFAULT_CHECKPOINTS",
    "LimitTarget",
    "RateFit",
    "fit_rate",
    "smoother_error_curve",
    "filter_error_curve",
    "GeometricSum",
    "geometric_sum_oracle",
    "geometric_sum_closed_form",
    "BrownianMoment",
    "brownian_moment_oracle",
    "brownian_moment_closed_form",
    "brownian_moment_bound",
]

DEFAULT_CHECKPOINTS = tuple(2**j for j in range(3, 11))


@dataclass(frozen=True, eq=False)
class LimitTarget:
    kind: str
    field: SpectralField

    @classmethod
    def truth(cls, u: SpectralField) -> LimitTarget:
        return cls("truth", u)

    @classmethod
    def projection(cls, u: SpectralField, p: int, q: int) -> LimitTarget:
        return cls(f"projection({p},{q})", partial_fourier_projection(u, p, q))

    @classmethod
    def average(cls, u: SpectralField) -> LimitTarget:
        return cls("average", SpectralField.constant(u.lattice, spatial_average(u)))

    @classmethod
    def shifted(cls, u: SpectralField, alpha) -> LimitTarget:
        return cls("shifted", translate(u, alpha))


@dataclass(frozen=True, eq=False)
class RateFit:
    """Least-squares line through ``(log n, log error)`` over ``checkpoints[discard:]``."""

    checkpoints: np.ndarray
    errors: np.ndarray
    stderr: np.ndarray
    slope: float
    intercept: float
    r2: float
    discard: int = 2
    errors_by_seed: np.ndarray | None = None

    def squared(self) -> RateFit:
        """Fit of the mean squared error (the RMS error squared)."""
        ms = self.errors**2
        return fit_rate(self.checkpoints, ms, 2 * self.errors * self.stderr, self.discard, self.errors_by_seed)

    def summary(self) -> str:
        return f"slope={self.slope:.6f} intercept={self.intercept:.6f} r2={self.r2:.6f}"


def fit_rate(checkpoints, errors, stderr=None, discard: int = 2, errors_by_seed=None) -> RateFit:
    n = np.asarray(checkpoints, dtype=float)
    e = np.asarray(errors, dtype=float)
    se = np.zeros_like(e) if stderr is None else np.asarray(stderr, dtype=float)
    x, y = np.log(n[discard:]), np.log(e[discard:])
    if len(x) < 2:
        raise ValueError("need at least two checkpoints after discarding transients")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(n.astype(int), e, se, float(slope), float(intercept), float(np.clip(r2, 0, 1)),
                   discard, errors_by_seed)


def _aggregate(per_seed: np.ndarray, checkpoints, discard: int) -> RateFit:
    sq = per_seed**2
    rms = np.sqrt(sq.mean(axis=0))
    if per_seed.shape[0] > 1:
        se_sq = sq.std(axis=0, ddof=1) / np.sqrt(per_seed.shape[0])
        se = np.divide(se_sq, 2 * rms, out=np.zeros_like(rms), where=rms > 0)
    else:
        se = np.zeros_like(rms)
    return fit_rate(checkpoints, rms, se, discard, per_seed)


def _check_checkpoints(checkpoints: Sequence[int]) -> list[int]:
    cps = [int(n) for n in checkpoints]
    if any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
        raise ValueError("checkpoints must be positive and strictly increasing")
    return cps


def _run_curve(cfg, prior, gamma, checkpoints, seeds, m0, model_path, error_fn, discard):
    cps = _check_checkpoints(checkpoints)
    n_max = cps[-1]
    lat = cfg.lattice
    m0 = SpectralField.zeros(lat) if m0 is None else m0
    op = AdvectionOperator(cfg.model_path() if model_path is None else model_path)
    base = ScenarioConfig(cfg.scenario, cfg.dt, n_max, cfg.truth_ic, cfg.obs_noise,
                          cfg.noise_seed, cfg.path_seed, cfg.model_c)
    per_seed = np.zeros((seeds, len(cps)))
    for i in range(seeds):
        run = base.with_seeds(cfg.noise_seed + i, cfg.path_seed + i)
        path = truth_path(run)
        ys = generate_observations(run, path)
        clean = truth_trajectory(run, path)
        state = initial_state(m0, prior, op, cfg.dt)
        j = 0
        for n, y in enumerate(ys, start=1):
            state = assimilate_step(state, y, gamma)
            if n == cps[j]:
                per_seed[i, j] = error_fn(state, clean[n - 1])
                j += 1
    return _aggregate(per_seed, cps, discard)


def smoother_error_curve(
    cfg: ScenarioConfig,
    prior: CovarianceSpec,
    gamma: CovarianceSpec,
    target: LimitTarget,
    s: float = 0.0,
    checkpoints: Sequence[int] = DEFAULT_CHECKPOINTS,
    seeds: int = 10,
    m0: SpectralField | None = None,
    model_path=None,
    discard: int = 2,
) -> RateFit:
    """RMS over noise/path seeds of ``||m'_n - M||_{H^s}`` at each checkpoint.

    Seed ``i`` uses ``noise_seed + i`` and ``path_seed + i`` from ``cfg``.
    """
    goal = target.field

    def err(state, _clean):
        return sobolev_norm(state.smoother_mean - goal, s)

    return _run_curve(cfg, prior, gamma, checkpoints, seeds, m0, model_path, err, discard)


def filter_error_curve(
    cfg: ScenarioConfig,
    prior: CovarianceSpec,
    gamma: CovarianceSpec,
    checkpoints: Sequence[int] = DEFAULT_CHECKPOINTS,
    seeds: int = 10,
    s: float = 0.0,
    target: Callable[[AdvectionOperator, int], SpectralField] | None = None,
    m0: SpectralField | None = None,
    model_path=None,
    discard: int = 2,
) -> RateFit:
    """RMS of ``||filter mean - target_n||_{H^s}``; the target defaults to the truth ``v'_n``.

    ``target(model_op, n)`` may instead return e.g. ``F_(p,q) e^{-t_n L} u``.
    """
    lat = cfg.lattice

    def err(state, clean):
        goal = SpectralField(lat, clean, check=False) if target is None else target(state.model_op, state.n)
        return sobolev_norm(filter_mean(state) - goal, s)

    return _run_curve(cfg, prior, gamma, checkpoints, seeds, m0, model_path, err, discard)


@dataclass(frozen=True)
class GeometricSum:
    value: complex
    modulus_sq: float
    closed_form: float
    resonant: bool


def geometric_sum_closed_form(x: float, n: int) -> float:
    """``[sin(n pi x) / sin(pi x)]^2``, or ``n^2`` when x is an integer."""
    if abs(x - round(x)) < 1e-12:
        return float(n * n)
    return float((np.sin(n * np.pi * x) / np.sin(np.pi * x)) ** 2)


def geometric_sum_oracle(k, delta_c, dt: float, n: int) -> GeometricSum:
    """Direct ``sum_{l=0}^{n-1} exp(2 pi i (k.dc) t_{l+1})`` next to its closed-form modulus."""
    x = float(np.dot(np.asarray(k, dtype=float), np.asarray(delta_c, dtype=float)) * dt)
    resonant = abs(x - round(x)) < 1e-12
    if resonant:
        value = complex(n)
    else:
        l = np.arange(1, n + 1)
        value = complex(np.sum(np.exp(2j * np.pi * x * l)))
    return GeometricSum(value, abs(value) ** 2, geometric_sum_closed_form(x, n), resonant)


@dataclass(frozen=True)
class BrownianMoment:
    estimate: float
    stderr: float
    closed_form: float
    bound: float

    @property
    def zscore(self) -> float:
        if self.stderr == 0:
            return 0.0 if self.estimate == self.closed_form else np.inf
        return (self.estimate - self.closed_form) / self.stderr


def brownian_moment_closed_form(k, epsilon: float, dt: float, n: int) -> float:
    """``sum_{l,l'} exp(-2 pi^2 eps^2 |k|^2 dt |l - l'|)`` in double-geometric closed form."""
    a = 2 * np.pi**2 * epsilon**2 * float(np.dot(k, k)) * dt
    if a == 0:
        return float(n * n)
    # written in q = exp(-a) so large a cannot overflow
    q = np.exp(-a)
    one_minus_q = -np.expm1(-a)
    tail = q * -np.expm1(-a * (n - 1)) / one_minus_q
    return float(n + 2.0 * q / one_minus_q * (n - 1 - tail))


def brownian_moment_bound(epsilon: float, dt: float, n: int) -> float:
    """Linear-in-n bound valid for every ``|k| >= 1``."""
    a = 2 * np.pi**2 * epsilon**2 * dt
    return float((1 + np.exp(-a)) / -np.expm1(-a) * n)


def brownian_moment_oracle(k, epsilon: float, dt: float, n: int, num_realizations: int,
                           seed: int = 0) -> BrownianMoment:
    """Monte Carlo estimate of ``E|sum_l exp(2 pi i k.eps W(t_{l+1}))|^2``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    rng = np.random.default_rng(seed)
    kv = np.asarray(k, dtype=float)
    # k.W(t) is a 1D Brownian motion with variance |k|^2 t
    incr = rng.normal(0.0, np.sqrt(dt * float(kv @ kv)), size=(num_realizations, n))
    kw = np.cumsum(incr, axis=1)
    sums = np.exp(2j * np.pi * epsilon * kw).sum(axis=1)
    vals = np.abs(sums) ** 2
    stderr = float(vals.std(ddof=1) / np.sqrt(num_realizations)) if num_realizations > 1 else 0.0
    return BrownianMoment(float(vals.mean()), stderr,
                          brownian_moment_closed_form(kv, epsilon, dt, n),
                          brownian_moment_bound(epsilon, dt, n))
