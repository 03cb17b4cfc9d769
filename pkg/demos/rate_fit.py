"""
Fitting convergence rates
=========================

Error curves are averaged over noise seeds and a straight line is fitted in
log-log coordinates after dropping the first two checkpoints. With no model
error the slope sits near -1/2. Under a decaying (integrable) velocity drift
the filter's mean squared error falls much faster.
"""

from torusfilter import GridWhite, LaplacianPower
from torusfilter.asymptotics import LimitTarget, filter_error_curve, smoother_error_curve
from torusfilter.truthgen import Scenario, ScenarioConfig, reference_truth_ic

u = reference_truth_ic()
prior = LaplacianPower(1.0, 2.0, 0.0)
noise = GridWhite(1e-4)


def config(kind):
    return ScenarioConfig(Scenario(kind), 0.1, 1024, u)


fit = smoother_error_curve(config("none"), prior, noise, LimitTarget.truth(u), seeds=5)
print("no model error, smoother vs truth:", fit.summary())
for n, e, se in zip(fit.checkpoints, fit.errors, fit.stderr):
    print(f"  n={n:5d}  error={e:.5f} +- {se:.5f}")

###############################################################################
# Integrable drift: the RMS slope and the slope of its square.

fit = filter_error_curve(config("integrable"), prior, noise, seeds=5)
print("integrable drift, filter RMS error:     ", fit.summary())
print("integrable drift, filter squared error: ", fit.squared().summary())
