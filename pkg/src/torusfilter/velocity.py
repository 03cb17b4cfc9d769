"""Wave-velocity paths ``c(t)`` with exact displacement ``D(t) = int_0^t c(s) ds``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tolerances import TOL

__all__ = [
    "VelocityPath",
    "ConstantVelocity",
    "IntegrableDrift",
    "BrownianPerturbed",
    "displacement",
    "delta_displacement",
]


def _vec(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(2)
    a.flags.writeable = False
    return a


class VelocityPath:
    """Base class; subclasses implement :meth:`displacement`."""

    def displacement(self, t: float) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class ConstantVelocity(VelocityPath):
    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", _vec(self.c))

    def displacement(self, t: float) -> np.ndarray:
        return self.c * float(t)


@dataclass(frozen=True, eq=False)
class IntegrableDrift(VelocityPath):
    """Truth-side velocity ``c_base - dc(t)`` whose deviation integrates to ``alpha``.

    ``dc(t) = alpha * beta * t0**beta / (t + t0)**(1 + beta)`` so that
    ``int_0^t dc = alpha * (1 - (t0 / (t + t0))**beta)`` in closed form.
    """

    c_base: tuple
    alpha: tuple
    beta: float = 1.0
    t0: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "c_base", _vec(self.c_base))
        object.__setattr__(self, "alpha", _vec(self.alpha))
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")

    def drift_integral(self, t: float) -> np.ndarray:
        return self.alpha * (1.0 - (self.t0 / (float(t) + self.t0)) ** self.beta)

    def displacement(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("t must be nonnegative")
        return self.c_base * float(t) - self.drift_integral(t)


@dataclass(frozen=True, eq=False)
class BrownianPerturbed(VelocityPath):
    """``D(t) = c_base t - epsilon W(t)``, W a 2D Wiener path sampled at ``t_n = n dt``.

    The path is drawn eagerly for ``n = 0..n_steps`` and queries off that grid fail.
    Its stream is keyed apart from plain ``default_rng(seed)`` so that a path and an
    observation-noise sequence sharing a seed integer stay independent.
    """

    c_base: tuple
    epsilon: float
    dt: float
    n_steps: int
    seed: int = 0
    wiener: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "c_base", _vec(self.c_base))
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(1,)))
        increments = rng.normal(0.0, np.sqrt(self.dt), size=(self.n_steps, 2))
        w = np.zeros((self.n_steps + 1, 2))
        np.cumsum(increments, axis=0, out=w[1:])
        w.flags.writeable = False
        object.__setattr__(self, "wiener", w)

    def step_index(self, t: float) -> int:
        x = float(t) / self.dt
        n = int(round(x))
        if abs(x - n) > TOL.time_grid * max(1.0, abs(x)) or n < 0 or n > self.n_steps:
            raise ValueError(
                f"t={t} is not a sampled observation time n*dt with 0 <= n <= {self.n_steps}"
            )
        return n

    def displacement(self, t: float) -> np.ndarray:
        n = self.step_index(t)
        if self.epsilon == 0:
            return self.c_base * float(t)
        return self.c_base * float(t) - self.epsilon * self.wiener[n]


def displacement(path: VelocityPath, t: float) -> np.ndarray:
    return path.displacement(t)


def delta_displacement(model: VelocityPath, truth: VelocityPath, t: float) -> np.ndarray:
    """``D_model(t) - D_truth(t)``: the accumulated model-minus-truth shift."""
    return model.displacement(t) - truth.displacement(t)
