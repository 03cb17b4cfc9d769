"""
Closed-form oracles
===================

Two sums govern the behaviour under model error. A constant velocity offset
produces a geometric sum whose modulus is a ratio of sines. A Brownian
velocity perturbation produces a second moment with a double-geometric
closed form that grows only linearly in n.
"""

from torusfilter.asymptotics import brownian_moment_oracle, geometric_sum_oracle

for k, dc in (((1, 0), (5.0, 5.0)), ((1, 1), (1 / 3 / 0.1, 0.0)), ((1, 2), (3.0, 1.0))):
    g = geometric_sum_oracle(k, dc, 0.1, 3)
    print(f"k={k} dc={dc}: |sum|^2={g.modulus_sq:.6f} closed form={g.closed_form:.6f} resonant={g.resonant}")

###############################################################################
# Monte Carlo against the Brownian closed form. z is in standard errors.

for k, n in (((1, 0), 100), ((2, 1), 50)):
    b = brownian_moment_oracle(k, 0.1, 0.1, n, 2000)
    print(f"k={k} n={n}: MC={b.estimate:.2f} +- {b.stderr:.2f}  closed={b.closed_form:.2f}  "
          f"bound={b.bound:.1f}  z={b.zscore:+.2f}")
