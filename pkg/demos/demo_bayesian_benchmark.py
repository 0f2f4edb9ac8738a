"""The simulated staffing world: partial demands arrive daily, forecasts are
calibrated interval estimates, and policies are compared on paired worlds.

A short run here; the checked-in configs under instances/ pin the full
benchmark (the same thing the `bench` subcommand drives).
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

import numpy as np

from staffing_minimax import LpEmulatorPolicy, LpResolvingPolicy
from staffing_minimax.bayesian import (DemandProcess, MdpPolicy, MdpSpec,
                                       NaiveBayesianPolicy, NaiveGreedyPolicy,
                                       calibrate_intervals, empirical_coverage,
                                       forecast_instance, paired_differences,
                                       run_bayesian_world, summarize)

T = 5
fixed = [1.0 if t <= 2 else 0.0 for t in range(1, T + 1)]
ready = [1.0 / (1.0 + np.exp(t - 3)) for t in range(1, T + 1)]
process = DemandProcess(T)
table = calibrate_intervals(process, draws=20_000, seed=11)
coverage = empirical_coverage(process, table, draws=20_000, seed=12)
print("calibrated widths:", np.round(table.width(), 3))
print("held-out coverage:", np.round(coverage, 3))

inst = forecast_instance([5.0, 5.0], [fixed, ready], table, process=process)
print(f"day-0 range for the interval policies: "
      f"[{inst.initial_range[0]:.2f}, {inst.initial_range[1]:.2f}]")

policies = {
    "lp_resolving": lambda: LpResolvingPolicy(inst),
    "lp_emulator": lambda: LpEmulatorPolicy(inst),
    "naive_greedy": lambda: NaiveGreedyPolicy(inst),
    "naive_bayesian": lambda: NaiveBayesianPolicy(inst),
    "empirical_mdp": lambda: MdpPolicy(inst, process,
                                       MdpSpec(grid_levels=11)),
}
rows = run_bayesian_world(inst, process, table, policies, replications=40,
                          seed=20260808)
print(f"\n{'policy':16s} {'mean cost':>10s} {'stderr':>8s} {'ms':>8s}")
for name, s in summarize(rows).items():
    print(f"{name:16s} {s['mean_cost']:10.3f} {s['stderr']:8.3f} "
          f"{s['runtime_ms']:8.0f}")
gap, se = paired_differences(rows, "naive_greedy", "lp_resolving")
print(f"\npaired greedy minus resolving: {gap:+.3f} (se {se:.3f})")
