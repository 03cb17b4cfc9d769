"""
Learning the velocity
=====================

Metropolis-within-Gibbs alternates pCN updates of the initial condition with
random-walk updates of the velocity. The chain is seeded by the phase-drift
estimator and the smoother mean at that velocity. The posterior spread of the
velocity shrinks as observations accumulate.
"""

import numpy as np

from torusfilter import GridWhite, LaplacianPower, SpectralField
from torusfilter.kalman import smoother_closed_form
from torusfilter.mcmc import (
    GibbsConfig,
    PcnConfig,
    gibbs_sample_velocity_and_ic,
    velocity_proposal_std,
    velocity_seed,
)
from torusfilter.operators import AdvectionOperator
from torusfilter.truthgen import Scenario, ScenarioConfig, generate_observations, reference_truth_ic
from torusfilter.velocity import ConstantVelocity

u = reference_truth_ic()
prior = LaplacianPower(1.0, 2.0, 0.0)
noise = GridWhite(1e-4)
dt = 0.1

print(f"{'n':>5s} {'seed c':>22s} {'posterior mean c':>26s} {'posterior std c':>20s}")
for n in (10, 50, 100):
    ys = generate_observations(ScenarioConfig(Scenario("none"), dt, n, u))
    c0 = velocity_seed(ys, dt)
    op = AdvectionOperator(ConstantVelocity(c0))
    v0 = smoother_closed_form(SpectralField.zeros(u.lattice), prior, noise, op, ys, dt).smoother_mean
    # pCN steps shrink with n since the posterior on v0 narrows like 1/sqrt(n)
    cfg = GibbsConfig(PcnConfig(0.003 / np.sqrt(n), 600, 3000, seed=1),
                      velocity_proposal_std(ys, v0, dt, noise), inner_v_steps=10)
    ch = gibbs_sample_velocity_and_ic(cfg, prior, ys, dt, noise, c0, v_init=v0)
    print(f"{n:5d} {np.array2string(c0, precision=6):>22s} "
          f"{np.array2string(ch.c_mean, precision=8):>26s} {np.array2string(ch.c_std, precision=2):>20s}")
