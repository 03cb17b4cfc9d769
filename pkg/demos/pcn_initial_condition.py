"""
Sampling the initial condition with pCN
=======================================

With the velocity known, the posterior on the initial condition is Gaussian
and the Kalman smoother gives its mean exactly. A preconditioned
Crank-Nicolson chain should agree with it up to Monte Carlo error. A small
lattice keeps the chain short enough to mix.
"""

import numpy as np

from torusfilter import GaussianSampler, GridWhite, LaplacianPower, SpectralField, WavenumberLattice
from torusfilter.kalman import smoother_closed_form
from torusfilter.mcmc import PcnConfig, pcn_sample_initial_condition
from torusfilter.operators import AdvectionOperator
from torusfilter.truthgen import Scenario, ScenarioConfig, generate_observations
from torusfilter.velocity import ConstantVelocity

lat = WavenumberLattice(2, 6)
prior = LaplacianPower(1.0, 2.0, 0.0)
noise = GridWhite(0.1)
c = (-0.5, -1.0)

u = GaussianSampler(prior, SpectralField.zeros(lat), seed=7).sample()
ys = generate_observations(ScenarioConfig(Scenario("none"), 0.1, 20, u, obs_noise=noise, noise_seed=3))

chain = pcn_sample_initial_condition(PcnConfig(0.3, 10_000, 100_000), prior, c, ys, 0.1, 0.1)
exact = smoother_closed_form(SpectralField.zeros(lat), prior, noise, AdvectionOperator(ConstantVelocity(c)), ys, 0.1)
print(f"acceptance rate {chain.acceptance_rate:.2f}")

###############################################################################
# Mode-by-mode comparison, in units of the batch-means standard error.

rep = lat.representatives
d = chain.mean.coeff - exact.smoother_mean.coeff
print(f"{'k':>8s} {'z re':>7s} {'z im':>7s} {'var ratio':>10s}")
for idx in zip(*np.nonzero(rep)):
    k = (int(lat.k1[idx]), int(lat.k2[idx]))
    zr = d.real[idx] / chain.stderr_re[idx]
    zi = d.imag[idx] / chain.stderr_im[idx]
    print(f"{str(k):>8s} {zr:7.2f} {zi:7.2f} {chain.variance[idx] / exact.variance[idx]:10.3f}")
