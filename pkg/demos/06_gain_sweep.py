"""Coupling-gain comparison: larger gains settle faster.

Runs the three shipped presets of the six-agent benchmark and tabulates the
settling time of the stacked output error, reproducing the qualitative
ordering (8, 1) slower than (8, 8) slower than (20, 8).
"""

import time

from oocsim import centralized_minimizer, output_error, run_scenario, settling_time
from oocsim.scenarios import example2

scenario = example2()
y_star = centralized_minimizer(scenario.costs)
eps = 1e-2

print(f"{'preset':<8} {'gamma1':>7} {'gamma2':>7} {'settling(1e-2)':>15} {'final err':>11}")
for preset in scenario.gain_presets:
    sc = scenario.with_preset(preset)
    start = time.perf_counter()
    ode, traj = run_scenario(sc)
    wall = time.perf_counter() - start
    err = output_error(traj, y_star)
    settle = settling_time(traj.times, err, eps)
    print(f"{preset:<8} {sc.coupling.gamma1:>7g} {sc.coupling.gamma2:>7g} "
          f"{settle:>13.2f} s {err[-1]:>11.2e}   ({wall:.0f} s wall)")
