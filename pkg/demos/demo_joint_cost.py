"""Folding wages into the objective: staffing imbalance plus the wage bill.

The objective becomes the worst of T+1 affine pieces (understaffing plus
all wages; overstaffing after each possible switch day plus wages paid so
far), minimized as a plain linear program and emulated online as usual.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from staffing_minimax import (JointCostPolicy, load_instance, play,
                              single_switch_sequence)

here = os.path.dirname(__file__)
ri = load_instance(os.path.join(here, os.pardir, "instances",
                                "joint_demo.json"))
policy = JointCostPolicy(ri)
print(f"flat wage {ri.wages[0, 0]:.2f} per hire; "
      f"joint program value {policy.objective:.6f}")

inst = ri.base
for k in (1, 5, 10):
    seq = single_switch_sequence(inst, k)
    plan = play(JointCostPolicy(ri), inst, seq)
    wages = float((ri.wages * plan.hires).sum())
    lo, hi = seq.effective_lo[-1], seq.effective_hi[-1]
    total = plan.total_net
    imbalance = max(inst.under_cost * (hi - total),
                    inst.over_cost * (total - lo), 0.0)
    print(f"  switch at {k:2d}: hired {total:.3f}, wages {wages:.4f}, "
          f"worst imbalance {imbalance:.4f}, joint "
          f"{wages + imbalance:.4f} <= {policy.objective:.4f}")
