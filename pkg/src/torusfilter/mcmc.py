"""Function-space MCMC for the initial condition and the wave velocity.

The v0 block is preconditioned Crank-Nicolson (prior-reversible, so only the data
misfit enters the acceptance ratio); the velocity block is a Gaussian random walk.
Both use the sufficient-statistic form of the white-noise misfit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gaussian import CovarianceSpec, GaussianSampler, GridWhite
from .kalman import WhiteNoiseMisfit
from .spectral import SpectralField, WavenumberLattice

__all__ = [
    "PcnConfig",
    "FlatBox",
    "GaussianVelocityPrior",
    "GibbsConfig",
    "PcnChain",
    "GibbsChain",
    "DegenerateModeError",
    "pcn_sample_initial_condition",
    "gibbs_sample_velocity_and_ic",
    "velocity_seed",
    "velocity_proposal_std",
]

_BLOCK = 1024  # proposals drawn per batch


@dataclass(frozen=True)
class PcnConfig:
    step_beta: float = 0.1
    n_burn: int = 10_000
    n_keep: int = 100_000
    seed: int = 0
    n_batches: int = 50

    def __post_init__(self):
        if not 0 < self.step_beta <= 1:
            raise ValueError(f"step_beta must lie in (0, 1], got {self.step_beta}")
        if self.n_burn < 0 or self.n_keep < 1:
            raise ValueError("need n_burn >= 0 and n_keep >= 1")
        if self.n_batches < 2:
            raise ValueError("n_batches must be at least 2")


@dataclass(frozen=True)
class FlatBox:
    """Improper-flat velocity prior restricted to an axis-aligned box."""

    low: tuple = (-10.0, -10.0)
    high: tuple = (10.0, 10.0)

    def log_density(self, c: np.ndarray) -> float:
        inside = np.all(c >= np.asarray(self.low)) and np.all(c <= np.asarray(self.high))
        return 0.0 if inside else -np.inf


@dataclass(frozen=True)
class GaussianVelocityPrior:
    mean: tuple = (0.0, 0.0)
    std: tuple = (1.0, 1.0)

    def __post_init__(self):
        if np.any(np.asarray(self.std, dtype=float) <= 0):
            raise ValueError("velocity prior std must be positive")

    def log_density(self, c: np.ndarray) -> float:
        z = (c - np.asarray(self.mean)) / np.asarray(self.std)
        return -0.5 * float(z @ z)


@dataclass(frozen=True)
class GibbsConfig:
    pcn: PcnConfig = field(default_factory=PcnConfig)
    c_proposal_std: tuple = (1e-3, 1e-3)
    c_prior: FlatBox | GaussianVelocityPrior = field(default_factory=FlatBox)
    inner_v_steps: int = 1
    inner_c_steps: int = 1

    def __post_init__(self):
        if np.any(np.asarray(self.c_proposal_std, dtype=float) <= 0):
            raise ValueError("c_proposal_std must be positive")
        if self.inner_v_steps < 0 or self.inner_c_steps < 1:
            raise ValueError("need inner_v_steps >= 0 and inner_c_steps >= 1")


@dataclass(frozen=True, eq=False)
class PcnChain:
    """Summary of a pCN run; moments are over the kept states only."""

    mean: SpectralField
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    variance: np.ndarray
    acceptance_rate: float
    phi_trace: np.ndarray
    accepted: np.ndarray
    final_state: SpectralField


@dataclass(frozen=True, eq=False)
class GibbsChain:
    c_init: np.ndarray
    c_samples: np.ndarray
    phi_trace: np.ndarray
    c_accepted: np.ndarray
    v0_mean: SpectralField
    v_acceptance_rate: float
    c_acceptance_rate: float

    @property
    def c_mean(self) -> np.ndarray:
        return self.c_samples.mean(axis=0)

    @property
    def c_std(self) -> np.ndarray:
        return self.c_samples.std(axis=0, ddof=1)


class DegenerateModeError(ValueError):
    pass


def _noise(sigma2) -> GridWhite:
    return sigma2 if isinstance(sigma2, GridWhite) else GridWhite(float(sigma2))


def _infer_lattice(lattice, observations, *fields) -> WavenumberLattice:
    if lattice is not None:
        return lattice
    if observations:
        return observations[0].lattice
    for f in fields:
        if f is not None:
            return f.lattice
    raise ValueError("cannot infer the lattice: pass observations, m0, v_init or lattice")


class _PcnKernel:
    """pCN moves around the prior mean with batched proposal draws."""

    def __init__(self, prior: CovarianceSpec, m0: SpectralField, beta: float,
                 seed: np.random.SeedSequence):
        s_prop, s_unif = seed.spawn(2)
        self.sampler = GaussianSampler(prior, SpectralField.zeros(m0.lattice), seed=s_prop)
        self.rng = np.random.default_rng(s_unif)
        self.m0 = m0.coeff
        self.a = np.sqrt(1.0 - beta * beta)
        self.beta = beta
        self._xi = np.empty((0,))
        self._u = np.empty((0,))
        self._i = 0

    def _next(self):
        if self._i >= len(self._u):
            self._xi = self.sampler.draw_fluctuations(_BLOCK)
            self._u = self.rng.random(_BLOCK)
            self._i = 0
        i = self._i
        self._i += 1
        return self._xi[i], self._u[i]

    def step(self, v: np.ndarray, phi: float, misfit: WhiteNoiseMisfit, stat: np.ndarray):
        xi, u = self._next()
        prop = self.m0 + self.a * (v - self.m0) + self.beta * xi
        phi_prop = misfit.phi_from_statistic(prop, stat)
        if np.log(u) < phi - phi_prop:
            return prop, phi_prop, True
        return v, phi, False


class _BatchMoments:
    def __init__(self, shape, n_keep: int, n_batches: int):
        self.size = max(1, n_keep // n_batches)
        self.sum = np.zeros(shape, dtype=complex)
        self.sum_abs2 = np.zeros(shape)
        self.batch_sum = np.zeros(shape, dtype=complex)
        self.batch_means: list[np.ndarray] = []
        self.count = 0

    def add(self, v: np.ndarray):
        self.sum += v
        self.sum_abs2 += v.real**2 + v.imag**2
        self.batch_sum += v
        self.count += 1
        if self.count % self.size == 0:
            self.batch_means.append(self.batch_sum / self.size)
            self.batch_sum = np.zeros_like(self.batch_sum)

    def finish(self):
        mean = self.sum / self.count
        var = np.maximum(self.sum_abs2 / self.count - np.abs(mean) ** 2, 0.0)
        bm = np.array(self.batch_means)
        if len(bm) >= 2:
            se_re = bm.real.std(axis=0, ddof=1) / np.sqrt(len(bm))
            se_im = bm.imag.std(axis=0, ddof=1) / np.sqrt(len(bm))
        else:
            se_re = se_im = np.full(mean.shape, np.inf)
        return mean, se_re, se_im, var


def pcn_sample_initial_condition(
    cfg: PcnConfig,
    prior: CovarianceSpec,
    c,
    observations,
    dt: float,
    sigma2=1e-4,
    m0: SpectralField | None = None,
    lattice: WavenumberLattice | None = None,
    v_init: SpectralField | None = None,
) -> PcnChain:
    """Sample ``P(v0 | c, Y_n)`` with proposal ``m0 + sqrt(1-b^2)(v - m0) + b xi``.

    Accepts with probability ``min(1, exp(Phi(v) - Phi(v')))``. With no
    observations ``Phi = 0`` and every proposal is accepted.
    """
    lattice = _infer_lattice(lattice, observations, m0, v_init)
    m0 = SpectralField.zeros(lattice) if m0 is None else m0
    misfit = WhiteNoiseMisfit(observations, _noise(sigma2), dt, lattice)
    stat = misfit.statistic(c)
    kernel = _PcnKernel(prior, m0, cfg.step_beta, np.random.SeedSequence(cfg.seed))
    v = (m0 if v_init is None else v_init).coeff.copy()
    phi = misfit.phi_from_statistic(v, stat)

    for _ in range(cfg.n_burn):
        v, phi, _acc = kernel.step(v, phi, misfit, stat)

    moments = _BatchMoments(lattice.shape, cfg.n_keep, cfg.n_batches)
    phis = np.empty(cfg.n_keep)
    accepted = np.zeros(cfg.n_keep, dtype=bool)
    for i in range(cfg.n_keep):
        v, phi, accepted[i] = kernel.step(v, phi, misfit, stat)
        phis[i] = phi
        moments.add(v)
    mean, se_re, se_im, var = moments.finish()
    return PcnChain(
        SpectralField(lattice, mean, check=False),
        se_re, se_im, var, float(accepted.mean()), phis, accepted,
        SpectralField(lattice, v, check=False),
    )


class _StatisticCache:
    """``S_k(c)`` via separable phase tables: no per-mode exponentials."""

    def __init__(self, misfit: WhiteNoiseMisfit):
        lat = misfit.lattice
        self.misfit = misfit
        self.ks = np.arange(-lat.max_mode, lat.max_mode + 1)
        self.times = misfit._times
        self.y = misfit._y

    def __call__(self, c) -> np.ndarray:
        if self.misfit.n == 0:
            return np.zeros(self.misfit.lattice.shape, dtype=complex)
        a = np.exp(2j * np.pi * c[0] * np.outer(self.times, self.ks))
        b = np.exp(2j * np.pi * c[1] * np.outer(self.times, self.ks))
        return np.einsum("la,lb,lab->ab", a, b, self.y, optimize=True)


def gibbs_sample_velocity_and_ic(
    cfg: GibbsConfig,
    prior: CovarianceSpec,
    observations,
    dt: float,
    sigma2,
    c_init,
    m0: SpectralField | None = None,
    v_init: SpectralField | None = None,
    lattice: WavenumberLattice | None = None,
) -> GibbsChain:
    """Metropolis-within-Gibbs over ``(c, v0)``.

    Each sweep makes ``inner_v_steps`` pCN moves on v0 given c, then
    ``inner_c_steps`` random-walk moves on c given v0 accepted with
    ``Phi(v0; c) - Phi(v0; c') + log rho(c') - log rho(c)``. Sweep counts come from
    ``cfg.pcn.n_burn`` / ``cfg.pcn.n_keep``; one c sample is kept per sweep.
    """
    lattice = _infer_lattice(lattice, observations, m0, v_init)
    m0 = SpectralField.zeros(lattice) if m0 is None else m0
    misfit = WhiteNoiseMisfit(observations, _noise(sigma2), dt, lattice)
    stat_of = _StatisticCache(misfit)
    s_v, s_c = np.random.SeedSequence(cfg.pcn.seed).spawn(2)
    kernel = _PcnKernel(prior, m0, cfg.pcn.step_beta, s_v)
    rng_c = np.random.default_rng(s_c)
    step_c = np.asarray(cfg.c_proposal_std, dtype=float)

    c = np.asarray(c_init, dtype=float).copy()
    log_rho = cfg.c_prior.log_density(c)
    if not np.isfinite(log_rho):
        raise ValueError(f"c_init={c.tolist()} has zero prior density")
    v = (m0 if v_init is None else v_init).coeff.copy()
    stat = stat_of(c)
    phi = misfit.phi_from_statistic(v, stat)

    n_total = cfg.pcn.n_burn + cfg.pcn.n_keep
    keep = cfg.pcn.n_keep
    c_samples = np.empty((keep, 2))
    phis = np.empty(keep)
    c_acc_flags = np.zeros(keep, dtype=bool)
    v_sum = np.zeros(lattice.shape, dtype=complex)
    v_acc = c_acc = 0
    v_moves = c_moves = 0

    for it in range(n_total):
        for _ in range(cfg.inner_v_steps):
            v, phi, acc = kernel.step(v, phi, misfit, stat)
            v_acc += acc
            v_moves += 1
        last = False
        for _ in range(cfg.inner_c_steps):
            c_prop = c + step_c * rng_c.standard_normal(2)
            log_rho_prop = cfg.c_prior.log_density(c_prop)
            u = rng_c.random()
            last = False
            c_moves += 1
            if np.isfinite(log_rho_prop):
                stat_prop = stat_of(c_prop)
                phi_prop = misfit.phi_from_statistic(v, stat_prop)
                if np.log(u) < phi - phi_prop + log_rho_prop - log_rho:
                    c, stat, phi, log_rho = c_prop, stat_prop, phi_prop, log_rho_prop
                    c_acc += 1
                    last = True
        j = it - cfg.pcn.n_burn
        if j >= 0:
            c_samples[j] = c
            phis[j] = phi
            c_acc_flags[j] = last
            v_sum += v

    return GibbsChain(
        np.asarray(c_init, dtype=float),
        c_samples,
        phis,
        c_acc_flags,
        SpectralField(lattice, v_sum / keep, check=False),
        v_acc / v_moves if v_moves else 0.0,
        c_acc / c_moves,
    )


def velocity_proposal_std(observations, v: SpectralField, dt: float, sigma2, factor: float = 1.5) -> np.ndarray:
    """Random-walk step for c from the curvature of ``Phi(v; c)`` at fixed v.

    ``d^2 Phi / dc_i^2 = (4 pi^2 / gamma) sum_k k_i^2 |v(k)|^2 sum_l t_l^2`` when the
    data fit is exact; the step is ``factor`` times the resulting conditional std.
    Computed once before the chain starts, so the kernel stays non-adaptive.
    """
    n = len(observations)
    if n == 0:
        raise ValueError("the curvature scale needs at least one observation")
    lat = v.lattice
    gam = _noise(sigma2).per_mode(lat)
    t2 = float(np.sum((dt * np.arange(1, n + 1)) ** 2))
    p = np.abs(v.coeff) ** 2
    out = np.empty(2)
    for i, k in enumerate((lat.k1, lat.k2)):
        h = 4 * np.pi**2 / gam * float(np.sum(k**2 * p)) * t2
        if h <= 0:
            raise ValueError(f"v carries no energy along direction {i + 1}; c_{i + 1} is unidentified")
        out[i] = factor / np.sqrt(h)
    return out


_SEED_MODES = ((1, 0), (0, 1))


def velocity_seed(observations, dt: float, reference=None) -> np.ndarray:
    """Phase-increment estimate of a constant velocity from modes (1,0) and (0,1).

    ``c_i = -mean_j angle(y_{j+1}(k) / y_j(k)) / (2 pi dt)``. The principal branch
    only resolves ``|c_i| dt < 1/2``; pass ``reference`` (a rough guess of c) to
    unwrap each increment to the branch nearest ``-2 pi c_ref dt``.
    """
    n = len(observations)
    if n < 2:
        raise ValueError(f"need at least two observations, got {n}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    out = np.empty(2)
    for i, k in enumerate(_SEED_MODES):
        y = np.array([obs[k] for obs in observations])
        small = np.flatnonzero(np.abs(y) < 1e-12)
        if small.size:
            j = int(small[0])
            raise DegenerateModeError(
                f"observed coefficient of mode {k} vanishes at step {j + 1} (|y| < 1e-12)"
            )
        incr = np.angle(y[1:] * np.conj(y[:-1]))
        if reference is not None:
            expected = -2 * np.pi * float(reference[i]) * dt
            incr = incr + 2 * np.pi * np.round((expected - incr) / (2 * np.pi))
        out[i] = -incr.mean() / (2 * np.pi * dt)
    return out
