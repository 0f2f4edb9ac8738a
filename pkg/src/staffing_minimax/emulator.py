"""Online emulation of canonical staffing profiles.

The emulator oracle tracks a precomputed canonical hire schedule and shrinks
the day's hires when the running demand upper bound drops: on day t the total
hired is

    (cum canonical through t - cum realized through t-1 - (R0 - Rhat_t))+

split across pools within the per-pool canonical caps.  The release-mode
variant additionally runs the critical-index release rule at each epoch end.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .model import (EpochState, Instance, PredictionSequence, ReleaseInstance,
                    StaffingPlan, UNLIMITED)


class SplitInfeasible(RuntimeError):
    """Required day total exceeds the canonical caps.

    Signals a violated precondition; the emulator guarantee says this can
    never fire for a valid canonical profile and a bound-respecting sequence.
    """


@dataclass
class EmulatorTrace:
    """Per-day audit record of an emulator run."""

    days: List[int] = field(default_factory=list)
    canonical_total: List[float] = field(default_factory=list)
    realized_total: List[float] = field(default_factory=list)
    r_hat: List[float] = field(default_factory=list)
    l_hat: List[float] = field(default_factory=list)
    hires: List[np.ndarray] = field(default_factory=list)
    releases: List[np.ndarray] = field(default_factory=list)
    critical_index: List[Optional[int]] = field(default_factory=list)

    def record(self, day, canon_cum, real_cum, r_hat, l_hat, hires,
               releases=None, critical=None):
        n = len(hires)
        self.days.append(day)
        self.canonical_total.append(float(canon_cum))
        self.realized_total.append(float(real_cum))
        self.r_hat.append(float(r_hat))
        self.l_hat.append(float(l_hat))
        self.hires.append(np.asarray(hires, float).copy())
        self.releases.append(np.zeros(n) if releases is None
                             else np.asarray(releases, float).copy())
        self.critical_index.append(critical)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["day", "pool", "canonical", "hired", "released",
                        "R_hat", "L_hat"])
            for r, day in enumerate(self.days):
                for i in range(len(self.hires[r])):
                    w.writerow([day, i, repr(self.canonical_total[r]),
                                repr(float(self.hires[r][i])),
                                repr(float(self.releases[r][i])),
                                repr(self.r_hat[r]), repr(self.l_hat[r])])


def split_hires(total: float, caps: np.ndarray, rho_today: np.ndarray
                ) -> np.ndarray:
    """Distribute a day total across pools, scarcest availability first.

    Pools are filled up to their canonical caps in ascending rho order (ties
    by pool index), which spends supply where it decays fastest.  Callers
    must not rely on the split beyond the caps.
    """
    n = len(caps)
    if total > caps.sum() + 1e-9:
        raise SplitInfeasible(
            f"day total {total:.12g} exceeds canonical caps {caps.sum():.12g}")
    hires = np.zeros(n)
    remaining = total
    for i in sorted(range(n), key=lambda i: (rho_today[i], i)):
        take = min(remaining, caps[i])
        hires[i] = max(0.0, take)
        remaining -= hires[i]
        if remaining <= 1e-15:
            break
    return hires


def emulator_step(canonical: np.ndarray, realized: np.ndarray, day: int,
                  r_hat: float, r0: float, rho_today: np.ndarray
                  ) -> np.ndarray:
    """One day of the emulator oracle; returns per-pool hires for `day`.

    canonical and realized are (n, T) arrays; realized columns at `day` and
    later are ignored.
    """
    canon_cum = float(canonical[:, :day].sum())
    real_cum = float(realized[:, :day - 1].sum())
    total = max(0.0, canon_cum - real_cum - (r0 - r_hat))
    return split_hires(total, canonical[:, day - 1].astype(float), rho_today)


def run_emulator(inst: Instance, canonical: np.ndarray,
                 sequence: PredictionSequence
                 ) -> Tuple[StaffingPlan, EmulatorTrace]:
    """Emulate a canonical profile against a full prediction sequence."""
    n, T = inst.availability.shape
    r0 = inst.initial_range[1]
    realized = np.zeros((n, T))
    trace = EmulatorTrace()
    for t in range(1, T + 1):
        r_hat = float(sequence.effective_hi[t - 1])
        l_hat = float(sequence.effective_lo[t - 1])
        hires = emulator_step(canonical, realized, t, r_hat, r0,
                              inst.availability[:, t - 1])
        realized[:, t - 1] = hires
        trace.record(t, canonical[:, :t].sum(), realized.sum(), r_hat, l_hat,
                     hires)
    return StaffingPlan.of(realized), trace


# --- Release-mode epoch mechanics --------------------------------------------

@dataclass
class EpochOutcome:
    hires: np.ndarray              # (n, days in epoch)
    releases: np.ndarray           # (n,), applied on the epoch's last day
    critical_index: int
    next_state: Optional[EpochState]


def critical_switch_day(r_observed: Sequence[float], realized_cum:
                        Sequence[float], canonical_cum: Sequence[float],
                        t0: int, tol: float = 1e-9) -> int:
    """Largest k in [t0, t_end] where the realized run still matches the
    canonical run's right endpoint gap; k = t0 always qualifies."""
    r_bar = r_observed[0]
    best = t0
    for idx in range(1, len(r_observed)):
        lhs = r_observed[idx] - realized_cum[idx]
        rhs = r_bar - canonical_cum[idx]
        if abs(lhs - rhs) <= tol:
            best = t0 + idx
    return best


class EpochRunner:
    """Incremental driver for one epoch of the costly-release algorithm.

    Feed observe() one interval per epoch day (hires come back immediately,
    following the emulator oracle within the epoch); call finish() after the
    last day for the critical-index releases and the next carried state.
    """

    def __init__(self, ri: ReleaseInstance, state: EpochState,
                 canonical_hires: np.ndarray, canonical_releases: dict,
                 trace: Optional[EmulatorTrace] = None):
        self.ri = ri
        self.state = state
        self.canonical = np.asarray(canonical_hires, float)
        self.canonical_releases = canonical_releases
        self.trace = trace
        inst = ri.base
        self.t0, self.t_end = ri.epoch_range(state.index)
        n = inst.n_pools
        self.realized = np.zeros((n, self.t_end - self.t0))
        self.l_bar, self.r_bar = state.interval
        self.r_hat = self.r_bar
        self.r_observed = [self.r_bar]
        self.realized_cum = [0.0]
        self.canon_cum = [0.0]
        self.idx = 0

    def observe(self, interval) -> np.ndarray:
        idx = self.idx
        if idx >= self.t_end - self.t0:
            raise ValueError("epoch already complete")
        t = self.t0 + 1 + idx
        self.r_hat = min(self.r_hat, interval.hi)
        total_canon = float(self.canonical[:, :idx + 1].sum())
        total_real = float(self.realized[:, :idx].sum())
        need = max(0.0, total_canon - total_real - (self.r_bar - self.r_hat))
        hires = split_hires(need, self.canonical[:, idx].astype(float),
                            self.state.availability[:, t - 1])
        self.realized[:, idx] = hires
        self.r_observed.append(interval.hi)
        self.realized_cum.append(float(self.realized.sum()))
        self.canon_cum.append(total_canon)
        self.idx = idx + 1
        if self.trace is not None:
            self.trace.record(t, total_canon, self.realized.sum(), self.r_hat,
                              max(self.l_bar, interval.lo), hires)
        return hires

    def finish(self) -> Tuple[np.ndarray, int, Optional[EpochState]]:
        if self.idx != self.t_end - self.t0:
            raise ValueError("epoch not fully observed")
        ri, state, inst = self.ri, self.state, self.ri.base
        ell = state.index
        n = inst.n_pools
        t0, t_end = self.t0, self.t_end
        k = critical_switch_day(self.r_observed, self.realized_cum,
                                self.canon_cum, t0)
        y = np.zeros(n)
        y_canon = self.canonical_releases.get(k)
        fee = ri.release_fees[ell - 1]
        if y_canon is not None and fee is not UNLIMITED:
            idx_k = k - t0
            delta_k = (self.r_bar - self.l_bar) if k == t0 else inst.delta(k)
            r_target = self.r_bar - delta_k + inst.delta(t_end)
            r_actual = self.r_observed[-1]
            gap = self.canon_cum[idx_k] - self.realized_cum[idx_k]
            y_total = r_target - r_actual - gap + float(y_canon.sum())
            if -1e-9 <= y_total <= float(y_canon.sum()) + 1e-9:
                y_total = min(max(y_total, 0.0), float(y_canon.sum()))
                remaining = y_total
                for i in range(n):
                    y[i] = min(remaining, float(y_canon[i]))
                    remaining -= y[i]
            # Otherwise: no releasing this epoch.
        if self.trace is not None and self.trace.days \
                and self.trace.days[-1] == t_end:
            self.trace.releases[-1] = y.copy()
            self.trace.critical_index[-1] = k

        next_state = None
        if ell < ri.n_epochs:
            rho = state.availability
            usage = np.zeros(n)
            for i in range(n):
                for idx in range(t_end - t0):
                    x = self.realized[i, idx]
                    if x > 0:
                        usage[i] += x / rho[i, t0 + idx]
            rho_end = rho[:, t_end - 1].copy()
            new_supply = rho_end * (state.remaining_supply - usage)
            new_avail = np.zeros_like(rho)
            for i in range(n):
                if rho_end[i] > 0:
                    new_avail[i, t_end:] = rho[i, t_end:] / rho_end[i]
            budget = state.remaining_budget
            if budget is not UNLIMITED:
                wage_bill = float(
                    (ri.wages[:, t0:t_end] * self.realized).sum())
                fee_bill = (0.0 if fee is UNLIMITED
                            else float(fee) * float(y.sum()))
                budget = budget - wage_bill - fee_bill
            r_last = self.r_observed[-1]
            next_state = EpochState(
                index=ell + 1,
                cum_hires=state.cum_hires + self.realized.sum(axis=1) - y,
                remaining_supply=np.maximum(new_supply, 0.0),
                remaining_budget=budget,
                interval=(r_last - inst.delta(t_end), r_last),
                availability=new_avail,
            )
        return y, k, next_state


def release_epoch_run(ri: ReleaseInstance, state: EpochState,
                      canonical_hires: np.ndarray, canonical_releases: dict,
                      intervals: Sequence, trace: Optional[EmulatorTrace] = None
                      ) -> EpochOutcome:
    """Batch form of EpochRunner: run one whole epoch and return its outcome.

    canonical_hires is the (n, len) epoch block of the subprogram's no-switch
    branch; canonical_releases maps each switch day k in the epoch's closed
    range to the canonical release vector.
    """
    runner = EpochRunner(ri, state, canonical_hires, canonical_releases, trace)
    t0, t_end = runner.t0, runner.t_end
    if len(intervals) != t_end - t0:
        raise ValueError(f"epoch {state.index} expects {t_end - t0} intervals")
    for iv in intervals:
        runner.observe(iv)
    y, k, next_state = runner.finish()
    return EpochOutcome(runner.realized, y, k, next_state)
