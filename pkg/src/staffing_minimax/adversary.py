"""Adversarial prediction sequences and a brute-force worst-case oracle.

The generators produce the structured sequences the theory is built on
(single-switch, the worst-case supply-draining sequence, multi-switch
configuration sequences) plus seeded random nested sequences for fuzzing.
The oracle exhaustively grids small instances to certify worst-case cost.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .model import (EpochState, Instance, InstanceError, PredictionInterval,
                    PredictionSequence, ReleaseInstance, fresh_state)
from .programs import single_switch_floor


class BudgetExceeded(RuntimeError):
    """Grid enumeration would exceed the configured size cap."""


def single_switch_sequence(inst: Instance, k: int) -> PredictionSequence:
    """High-signal intervals through day k, then the left endpoint freezes.

    Days t <= k show [R0 - eps_t - Delta_t, R0 - eps_t]; afterwards the left
    endpoint sits at the switch floor and the width stays at Delta_t.
    """
    T = inst.horizon
    if not (1 <= k <= T):
        raise InstanceError(f"switch day {k} outside [1, {T}]")
    lo0, hi0 = inst.initial_range
    floor = single_switch_floor(inst, k)
    intervals = []
    for t in range(1, T + 1):
        if t <= k:
            intervals.append(PredictionInterval(
                hi0 - inst.eps(t) - inst.delta(t), hi0 - inst.eps(t)))
        else:
            intervals.append(PredictionInterval(floor, floor + inst.delta(t)))
    return PredictionSequence.build(inst, intervals)


def worst_case_sequence(inst: Instance) -> PredictionSequence:
    """The supply-draining sequence [R0 - Delta_t, R0] (single pool, eps 0)."""
    if not inst.single_pool():
        raise InstanceError("worst-case sequence is a single-pool construction")
    if np.any(inst.inconsistency != 0):
        raise InstanceError("worst-case sequence assumes eps = 0")
    lo0, hi0 = inst.initial_range
    intervals = [PredictionInterval(hi0 - inst.delta(t), hi0)
                 for t in range(1, inst.horizon + 1)]
    return PredictionSequence.build(inst, intervals)


def configuration_sequence(ri: ReleaseInstance, config: Sequence[int],
                           state: Optional[EpochState] = None
                           ) -> PredictionSequence:
    """Multi-switch sequence encoded by one switch day per fee epoch.

    Within each epoch the right endpoint holds until the epoch's switch day,
    then the left endpoint holds while the interval tightens from above.
    Sequences with equal epoch prefixes agree through the earlier switch day.
    """
    inst = ri.base
    if state is None:
        state = fresh_state(inst, ri.budget, ri.pre_hires)
    first = state.index
    config = tuple(int(j) for j in config)
    n_epochs = ri.n_epochs - first + 1
    if len(config) != n_epochs:
        raise InstanceError(f"config {config} needs {n_epochs} entries")
    t_start = ri.epoch_range(first)[0]
    if t_start != 0:
        raise InstanceError("full-horizon sequences start from a fresh state")
    lo, hi = state.interval
    intervals = []
    for idx, ell in enumerate(range(first, ri.n_epochs + 1)):
        lo_e, hi_e = ri.epoch_range(ell)
        if not (lo_e <= config[idx] <= hi_e):
            raise InstanceError(
                f"switch day {config[idx]} outside epoch range [{lo_e},{hi_e}]")
        for t in range(lo_e + 1, hi_e + 1):
            if t <= config[idx]:
                lo, hi = hi - inst.delta(t), hi
            else:
                lo, hi = lo, lo + inst.delta(t)
            intervals.append(PredictionInterval(lo, hi))
    return PredictionSequence.build(inst, intervals)


def random_nested_sequence(inst: Instance, seed: int) -> PredictionSequence:
    """Seeded nested sequence honoring the width bounds (eps treated as 0).

    Each day's endpoints are drawn uniformly over the valid set
    {lo ≤ a ≤ b ≤ hi, b - a ≤ Delta_t} by rejection from the parent box.
    """
    rng = np.random.default_rng(seed)
    lo, hi = inst.initial_range
    intervals = []
    for t in range(1, inst.horizon + 1):
        big_w = hi - lo
        cap = min(inst.delta(t), big_w)
        if big_w <= 1e-15:
            a, w = lo, 0.0
        elif cap <= 1e-15:
            a, w = rng.uniform(lo, hi), 0.0
        else:
            # Width density is proportional to (W - w) on [0, cap]; invert
            # the CDF, then place the left endpoint uniformly.
            z = rng.uniform()
            area = big_w * cap - 0.5 * cap * cap
            w = big_w - np.sqrt(max(big_w * big_w - 2.0 * z * area, 0.0))
            w = min(w, cap)
            a = rng.uniform(lo, hi - w)
        lo, hi = float(a), float(a + w)
        intervals.append(PredictionInterval(lo, hi))
    return PredictionSequence.build(inst, intervals)


def sequence_from_csv(path, inst: Instance) -> PredictionSequence:
    """Ingest a day,lo,hi CSV (external forecasts) as a sequence."""
    rows = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            rows[int(row["day"])] = (float(row["lo"]), float(row["hi"]))
    missing = [t for t in range(1, inst.horizon + 1) if t not in rows]
    if missing:
        raise InstanceError(f"sequence file is missing days {missing}")
    return PredictionSequence.build(
        inst, [rows[t] for t in range(1, inst.horizon + 1)])


@dataclass(frozen=True)
class WorstCaseWitness:
    cost: float
    sequence: PredictionSequence
    demand: float


def worst_demand_cost(inst: Instance, total_net: float,
                      sequence: PredictionSequence) -> Tuple[float, float]:
    """(cost, demand) maximizing the imbalance over the final effective range.

    The imbalance is convex in the demand, so an endpoint always attains the
    maximum.
    """
    lo = float(sequence.effective_lo[-1])
    hi = float(sequence.effective_hi[-1])
    lo = min(lo, hi)      # inconsistent inputs can cross; clamp for scoring
    c_lo = inst.over_cost * max(0.0, total_net - lo)
    c_hi = inst.under_cost * max(0.0, hi - total_net)
    return (c_lo, lo) if c_lo >= c_hi else (c_hi, hi)


def grid_nested_intervals(lo: float, hi: float, width_cap: float,
                          grid: np.ndarray) -> List[Tuple[float, float]]:
    pts = [p for p in grid if lo - 1e-12 <= p <= hi + 1e-12]
    out = []
    for a in pts:
        for b in pts:
            if a <= b + 1e-12 and b - a <= width_cap + 1e-12:
                out.append((a, b))
    return out


def enumerate_grid_sequences(inst: Instance, grid_step: float,
                             cap: int = 2_000_000) -> List[PredictionSequence]:
    """All nested sequences with endpoints on the grid (eps = 0 only)."""
    if np.any(inst.inconsistency != 0):
        raise InstanceError("the grid adversary certifies eps = 0 instances "
                            "only")
    lo0, hi0 = inst.initial_range
    n_steps = int(round((hi0 - lo0) / grid_step))
    grid = lo0 + grid_step * np.arange(n_steps + 1)
    sequences: List[PredictionSequence] = []
    stack: List[Tuple[int, float, float, list]] = [(1, lo0, hi0, [])]
    count = 0
    while stack:
        t, lo, hi, prefix = stack.pop()
        for a, b in grid_nested_intervals(lo, hi, inst.delta(t), grid):
            chosen = prefix + [(a, b)]
            if t == inst.horizon:
                count += 1
                if count > cap:
                    raise BudgetExceeded(
                        f"more than {cap} grid sequences")
                sequences.append(PredictionSequence.build(inst, chosen))
            else:
                stack.append((t + 1, a, b, chosen))
    sequences.reverse()
    return sequences


def demand_candidates(sequence: PredictionSequence, grid_step: float
                      ) -> List[float]:
    """Grid points of the final effective range, endpoints always included."""
    lo = float(sequence.effective_lo[-1])
    hi = float(sequence.effective_hi[-1])
    if hi < lo:
        lo = hi
    cands = {lo, hi}
    k = int(np.floor(lo / grid_step)) if grid_step > 0 else 0
    p = k * grid_step
    while p <= hi + 1e-12:
        if p >= lo - 1e-12:
            cands.add(min(max(p, lo), hi))
        p += grid_step
    return sorted(cands)


def brute_force_worst_case(inst: Instance, policy_factory: Callable,
                           grid_step: float, cap: int = 2_000_000
                           ) -> WorstCaseWitness:
    """Exact worst case of a deterministic policy over the grid adversary.

    Enumerates every nested grid sequence, plays a fresh policy against each
    (policies are single-consumer), and scores against the worst demand
    candidate on the grid (endpoints included, which is exact because the
    cost is convex in the demand).
    """
    from .policies import play     # local import to avoid a cycle

    best: Optional[WorstCaseWitness] = None
    for seq in enumerate_grid_sequences(inst, grid_step, cap):
        policy = policy_factory()
        if getattr(policy, "clairvoyant", False):
            cost, demand = policy.worst_case_for(inst, seq)
        else:
            plan = play(policy, inst, seq)
            total = plan.total_net
            cost = -np.inf
            demand = None
            for d in demand_candidates(seq, grid_step):
                cd = (inst.under_cost * max(0.0, d - total)
                      + inst.over_cost * max(0.0, total - d))
                if cd > cost:
                    cost, demand = cd, d
        if best is None or cost > best.cost:
            best = WorstCaseWitness(cost, seq, demand)
    return best
