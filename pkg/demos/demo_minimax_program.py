"""The core object: a linear program whose value is the optimal worst-case
staffing cost, and whose solution is the canonical hire schedule.

Three single-pool instances over ten days (availability decaying, forecasts
sharpening) illustrate the regimes: ample supply with a perfect final
forecast (zero cost), scarce supply (the understaffing/overstaffing balance
picks an interior cost), and uninformative forecasts until the last day.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from staffing_minimax import (build_lp_single_switch, gamma_star_single_pool,
                              make_instance, minimax_value_and_profile,
                              validate_instance)

T = 10
rho = [1 - 0.8 ** (T - t + 1) for t in range(1, T + 1)]
sharpening = [1 - 0.5 ** (T - t) for t in range(1, T + 1)]
flat_until_end = [1.0] * (T - 1) + [0.3]

cases = {
    "ample supply, sharp final forecast": (4.0, sharpening),
    "scarce supply": (0.6, sharpening),
    "uninformative until the last day": (2.0, flat_until_end),
}

for label, (supply, deltas) in cases.items():
    inst = validate_instance(make_instance([supply], [rho], (0, 1), deltas))
    gamma, canonical = minimax_value_and_profile(inst)
    fixed_point = gamma_star_single_pool(inst)
    print(f"\n{label}  (supply s = {supply})")
    print(f"  optimal worst-case cost      = {gamma:.6f}")
    print(f"  single-pool fixed point      = {fixed_point.gamma_star:.6f}"
          f"  ({fixed_point.branch}, last hiring day {fixed_point.t_dagger})")
    print(f"  canonical hires by day       = "
          + " ".join(f"{x:.3f}" for x in canonical[0]))

print("\nThe model text itself is available for inspection:")
inst = validate_instance(make_instance([0.6], [rho], (0, 1), sharpening))
print("\n".join(build_lp_single_switch(inst).model.dump().splitlines()[:6]))
print("  ...")
