"""Regenerate every checked-in instance and bench config under instances/.

The three illustration instances come from the single-pool figure setup
(T=10, rho_t = 1 - 0.8^(T-t+1), range [0,1], c = C = 1); the bench configs
are the two-pool fixed/ready-worker worlds (T=5 and T=14) with calibration
tables computed from 20k seeded draws.  Running this script reproduces the
files byte-for-byte.
"""

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from staffing_minimax.bayesian import DemandProcess, calibrate_intervals
from staffing_minimax.model import (ReleaseInstance, make_instance,
                                    multi_station_to_dict, release_to_dict,
                                    save_instance, validate_instance,
                                    MultiStationInstance, StationSpec)

OUT = os.path.join(os.path.dirname(__file__), os.pardir, "instances")


def fig3(which):
    T = 10
    rho = [1 - 0.8 ** (T - t + 1) for t in range(1, T + 1)]
    informative = [1 - 0.5 ** (T - t) for t in range(1, T + 1)]
    flat = [1.0] * (T - 1) + [0.3]
    s, deltas = {"a": (4.0, informative), "b": (0.6, informative),
                 "c": (2.0, flat)}[which]
    return validate_instance(make_instance([s], [rho], (0, 1), deltas))


def bench_config(T, size, cutoff, midpoint, replications, seed):
    rho1 = [1.0 if t <= cutoff else 0.0 for t in range(1, T + 1)]
    rho2 = [1.0 / (1.0 + np.exp(t - midpoint)) for t in range(1, T + 1)]
    process = DemandProcess(T)
    table = calibrate_intervals(process, draws=20_000, seed=11)
    return {
        "kind": "bayesian_bench",
        "horizon": T,
        "pool_sizes": [float(size), float(size)],
        "availability": [rho1, [float(r) for r in rho2]],
        "under_cost": 1.0,
        "over_cost": 1.0,
        "prior_hi": 0.5,
        "policies": ["lp_resolving", "lp_emulator", "naive_greedy",
                     "naive_bayesian"],
        "replications": replications,
        "seed": seed,
        "calibration": table.to_dict(),
    }


def main():
    os.makedirs(OUT, exist_ok=True)
    for which in "abc":
        save_instance(fig3(which), os.path.join(OUT, f"fig3{which}.json"))

    # Small multi-station and release/joint demo instances for the CLI.
    rho = [[1.0, 0.6], [0.9, 0.5]]
    st = StationSpec((0.0, 1.0), np.array([0.6, 0.2]))
    msi = MultiStationInstance(np.array([0.8, 0.5]), np.array(rho), (st, st),
                               "max")
    with open(os.path.join(OUT, "multi_demo.json"), "w") as f:
        json.dump(multi_station_to_dict(msi), f, indent=1)
        f.write("\n")

    T = 4
    base = make_instance([0.7, 0.5],
                         [[1.0, 0.9, 0.7, 0.5], [0.8, 0.6, 0.5, 0.4]],
                         (0, 1), [0.8, 0.6, 0.35, 0.2], under_cost=1.0,
                         over_cost=2.0)
    release = ReleaseInstance(base=base, budget=1.0,
                              wages=np.full((2, T), 0.05),
                              epoch_breaks=(2, 4), release_fees=(0.1, None))
    with open(os.path.join(OUT, "release_demo.json"), "w") as f:
        json.dump(release_to_dict(release), f, indent=1)
        f.write("\n")

    joint = ReleaseInstance(base=fig3("b"), wages=np.full((1, 10), 0.05))
    with open(os.path.join(OUT, "joint_demo.json"), "w") as f:
        json.dump(release_to_dict(joint), f, indent=1)
        f.write("\n")

    with open(os.path.join(OUT, "bench_short.json"), "w") as f:
        json.dump(bench_config(5, 5, 2, 3, 100, 20260808), f, indent=1)
        f.write("\n")
    with open(os.path.join(OUT, "bench_long.json"), "w") as f:
        json.dump(bench_config(14, 20, 4, 9, 100, 20260808), f, indent=1)
        f.write("\n")
    print(f"wrote instances to {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()
