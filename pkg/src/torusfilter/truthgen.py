"""True signal and noisy observations under the model-error scenarios."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gaussian import CovarianceSpec, GaussianSampler, GridWhite
from .operators import AdvectionOperator
from .spectral import DEFAULT_LATTICE, SpectralField, WavenumberLattice
from .velocity import BrownianPerturbed, ConstantVelocity, IntegrableDrift, VelocityPath

__all__ = [
    "REFERENCE_VELOCITY",
    "SCENARIO_KINDS",
    "ScenarioError",
    "Scenario",
    "ScenarioConfig",
    "reference_truth_ic",
    "truth_path",
    "truth_trajectory",
    "generate_observations",
]

REFERENCE_VELOCITY = (-0.5, -1.0)
SCENARIO_KINDS = ("none", "const_rational", "const_irrational", "integrable", "brownian")

# 1/e and 1/pi are only double-precision approximations of irrationals; no exact
# resonance k.shift in Z occurs for |k| <= 15 and the n used here.
IRRATIONAL_SHIFT = (1.0 / np.e, 1.0 / np.pi)
RATIONAL_SHIFT = (0.5, 0.5)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """Truth velocity relative to the model velocity c.

    ``shift`` is the per-step displacement mismatch ``dt * (c - c')`` for the
    constant-shift kinds; ``alpha``/``beta``/``t0`` parametrise the integrable drift
    (``t0`` defaults to dt); ``epsilon`` scales the Brownian perturbation.
    """

    kind: str = "none"
    shift: tuple | None = None
    alpha: tuple = (0.5, 0.5)
    beta: float = 1.0
    t0: float | None = None
    epsilon: float = 0.1

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}; expected one of {SCENARIO_KINDS}")
        if self.shift is None:
            default = {"const_rational": RATIONAL_SHIFT, "const_irrational": IRRATIONAL_SHIFT}
            object.__setattr__(self, "shift", default.get(self.kind, (0.0, 0.0)))
        object.__setattr__(self, "shift", tuple(float(x) for x in self.shift))
        object.__setattr__(self, "alpha", tuple(float(x) for x in self.alpha))
        if len(self.shift) != 2 or len(self.alpha) != 2:
            raise ScenarioError("shift and alpha must be 2-vectors")
        if self.kind == "integrable" and not self.beta > 0:
            raise ScenarioError(f"integrable scenario needs beta > 0, got {self.beta}")
        if self.t0 is not None and not self.t0 > 0:
            raise ScenarioError(f"t0 must be positive, got {self.t0}")
        if self.kind == "brownian" and self.epsilon < 0:
            raise ScenarioError(f"brownian scenario needs epsilon >= 0, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    scenario: Scenario
    dt: float
    n_obs: int
    truth_ic: SpectralField
    obs_noise: CovarianceSpec | None = field(default_factory=GridWhite)
    noise_seed: int = 0
    path_seed: int = 0
    model_c: tuple = REFERENCE_VELOCITY

    def __post_init__(self):
        if not self.dt > 0:
            raise ScenarioError(f"dt must be positive, got {self.dt}")
        if int(self.n_obs) != self.n_obs or self.n_obs < 1:
            raise ScenarioError(f"n_obs must be a positive integer, got {self.n_obs}")

    @property
    def lattice(self) -> WavenumberLattice:
        return self.truth_ic.lattice

    def model_path(self) -> VelocityPath:
        return ConstantVelocity(self.model_c)

    def with_seeds(self, noise_seed: int, path_seed: int | None = None) -> ScenarioConfig:
        return ScenarioConfig(
            self.scenario, self.dt, self.n_obs, self.truth_ic, self.obs_noise,
            noise_seed, self.path_seed if path_seed is None else path_seed, self.model_c,
        )


def reference_truth_ic(lattice: WavenumberLattice = DEFAULT_LATTICE) -> SpectralField:
    """``sum_{k1,k2=1}^3 sin(2 pi k1 x1) + cos(2 pi k2 x2)``, i.e. three copies of each term."""
    if lattice.max_mode < 3:
        raise ValueError(f"the reference initial condition needs max_mode >= 3, got {lattice.max_mode}")
    modes = {}
    for k in (1, 2, 3):
        modes[(k, 0)] = 3 * (-0.5j)  # 3 sin(2 pi k x1)
        modes[(0, k)] = 3 * 0.5  # 3 cos(2 pi k x2)
    return SpectralField.from_modes(lattice, modes)


def truth_path(cfg: ScenarioConfig) -> VelocityPath:
    sc = cfg.scenario
    c = np.asarray(cfg.model_c, dtype=float)
    if sc.kind == "none":
        return ConstantVelocity(c)
    if sc.kind in ("const_rational", "const_irrational"):
        return ConstantVelocity(c - np.asarray(sc.shift) / cfg.dt)
    if sc.kind == "integrable":
        return IntegrableDrift(c, sc.alpha, sc.beta, cfg.dt if sc.t0 is None else sc.t0)
    return BrownianPerturbed(c, sc.epsilon, cfg.dt, cfg.n_obs, seed=cfg.path_seed)


def truth_trajectory(cfg: ScenarioConfig, path: VelocityPath | None = None) -> np.ndarray:
    """Coefficients of ``v'_l`` for ``l = 1..n_obs``, shape ``(n_obs, 2M+1, 2M+1)``."""
    path = truth_path(cfg) if path is None else path
    lat = cfg.lattice
    disp = np.array([path.displacement(l * cfg.dt) for l in range(1, cfg.n_obs + 1)])
    kd = lat.k1[None] * disp[:, 0, None, None] + lat.k2[None] * disp[:, 1, None, None]
    return cfg.truth_ic.coeff[None] * np.exp(-2j * np.pi * kd)


def generate_observations(cfg: ScenarioConfig, path: VelocityPath | None = None) -> list[SpectralField]:
    """``y'_l = e^{-t_l L'} u + eta'_l``; deterministic given the seeds."""
    lat = cfg.lattice
    clean = truth_trajectory(cfg, path)
    if cfg.obs_noise is not None:
        sampler = GaussianSampler(cfg.obs_noise, SpectralField.zeros(lat), seed=cfg.noise_seed)
        clean = clean + sampler.draw_fluctuations(cfg.n_obs)
    return [SpectralField(lat, y, check=False) for y in clean]
