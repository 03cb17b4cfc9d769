"""
Where does the smoother go under model error?
=============================================

Observations are generated with a velocity that differs from the one the
filter assumes. Depending on the mismatch, the smoother mean converges to the
truth, to a sub-lattice of its Fourier modes, to its spatial average, or to a
translated copy. This script measures the error against each candidate limit
and writes the final smoother means as PGM images.
"""

from pathlib import Path

from torusfilter import GridWhite, LaplacianPower, SpectralField
from torusfilter.asymptotics import LimitTarget, smoother_error_curve
from torusfilter.export import write_pgm
from torusfilter.kalman import smoother_closed_form
from torusfilter.operators import AdvectionOperator
from torusfilter.truthgen import Scenario, ScenarioConfig, generate_observations, reference_truth_ic
from torusfilter.velocity import ConstantVelocity

out = Path("demo_out/limit_objects")
u = reference_truth_ic()
prior = LaplacianPower(1.0, 2.0, 0.0)
noise = GridWhite(1e-4)
checkpoints = (8, 16, 32, 64, 128, 256)

###############################################################################
# Each scenario paired with the limit the smoother should approach, and with
# the truth itself for comparison.

cases = {
    "none": LimitTarget.truth(u),
    "const_rational": LimitTarget.projection(u, 2, 2),
    "const_irrational": LimitTarget.average(u),
    "integrable": LimitTarget.shifted(u, (0.5, 0.5)),
}

print(f"{'scenario':18s} {'target':18s} {'err(n=256)':>11s} {'vs truth':>10s}")
for kind, target in cases.items():
    cfg = ScenarioConfig(Scenario(kind), 0.1, checkpoints[-1], u)
    good = smoother_error_curve(cfg, prior, noise, target, checkpoints=checkpoints, seeds=3)
    bad = smoother_error_curve(cfg, prior, noise, LimitTarget.truth(u), checkpoints=checkpoints, seeds=3)
    print(f"{kind:18s} {target.kind:18s} {good.errors[-1]:11.4f} {bad.errors[-1]:10.4f}")

    # one realization of the smoother mean, as an image
    ys = generate_observations(cfg)
    op = AdvectionOperator(ConstantVelocity(cfg.model_c))
    mean = smoother_closed_form(SpectralField.zeros(u.lattice), prior, noise, op, ys, cfg.dt).smoother_mean
    write_pgm(out / f"{kind}_mean.pgm", mean)

write_pgm(out / "truth.pgm", u)
print(f"images written to {out}/")
