"""
Why the default angle bound is 0.30 rad.

For the constraint to matter, the cheapest dispatch must violate the bound
while some dispatch that meets demand satisfies it. On the default
scenario:

* the economic (baseline) dispatch peaks at about 0.369 rad;
* equal sharing of the load peaks at about 0.281 rad.

Any bound in between gives an active yet satisfiable constraint. A bound of
0.6 rad would sit far above both. The script sweeps dispatches along the
segment from equal sharing to the baseline and asserts the bracket.

    python3 demos/calibrate_delta_max.py
"""

import numpy as np

from zorssqp.benchmarks.power import (DEFAULT_DELTA_MAX, baseline_qp, default_power_spec,
                                      max_angle_separation, simulate_network)

spec = default_power_spec()
x_base = baseline_qp(spec)
x_equal = np.full(spec.n_gen, sum(spec.demand) / spec.n_gen)


def separation(x):
    return max_angle_separation(simulate_network(spec, x), spec.edges)


# every point on the segment meets demand and respects the [0, 2] bounds
for s in np.linspace(0.0, 1.0, 11):
    x = (1 - s) * x_equal + s * x_base
    print(f"s={s:4.1f}  cost={np.sum(np.array(spec.a) * x**2 + np.array(spec.b) * x):.4f}  "
          f"peak separation={separation(x):.4f}")

sep_base, sep_equal = separation(x_base), separation(x_equal)
assert sep_equal < DEFAULT_DELTA_MAX < sep_base, (sep_equal, DEFAULT_DELTA_MAX, sep_base)
print(f"bracket: {sep_equal:.4f} < delta_max = {DEFAULT_DELTA_MAX} < {sep_base:.4f}")
