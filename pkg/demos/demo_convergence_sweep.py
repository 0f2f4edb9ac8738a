"""Value of sharper forecasts: the optimal worst-case cost is nonincreasing
in the forecast convergence rate.

Error bounds follow 1/sqrt(t * eta) - 1/sqrt((T+1) * eta); larger eta means
every day's forecast is tighter, so the cap can only improve.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from staffing_minimax.cli import companion_sweep_instance
from staffing_minimax.lp import solve_lp
from staffing_minimax.programs import build_lp_single_switch

print(f"{'eta':>8s} {'optimal worst-case cost':>24s}")
previous = None
for eta in (0.25, 0.5, 1.0, 2.0, 4.0):
    inst = companion_sweep_instance(T=14, size=1.0, eta=eta, under_cost=1.0,
                                    over_cost=1.0)
    value = solve_lp(build_lp_single_switch(inst).model).objective
    marker = "" if previous is None or value <= previous + 1e-9 else "  <-- ?"
    print(f"{eta:8.2f} {value:24.6f}{marker}")
    previous = value
