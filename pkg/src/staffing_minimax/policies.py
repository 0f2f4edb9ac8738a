"""Online staffing policies with a uniform step interface.

Each policy is a single-consumer object: construct it, then feed one
observation per day and collect the day's decision.  Decisions depend only
on prior information, history, and the current observation.  The provably
minimax-optimal set lives here; Bayesian heuristics and MDP baselines live
in the benchmarks module and follow the same protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .emulator import EpochRunner, emulator_step
from .model import (EpochState, Instance, InstanceError, MultiStationInstance,
                    PredictionInterval, PredictionSequence, ReleaseInstance,
                    StaffingPlan, fresh_state, validate_release_instance)
from .programs import (build_lp_joint_cost, build_lp_multi_station,
                       build_lp_release, build_lp_resolving,
                       extract_canonical, minimax_value_and_profile,
                       solve_canonical)


class MultiPoolUnsupported(InstanceError):
    pass


class ParameterOutOfRange(ValueError):
    pass


class UnsupportedBase(TypeError):
    pass


@dataclass(frozen=True)
class DayObservation:
    """What a policy sees on one day.

    interval is always present; partial demand and the day's sampled future
    partials exist only in the Bayesian world (None otherwise).
    """

    day: int
    interval: PredictionInterval
    partial: Optional[float] = None
    samples: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Decision:
    hires: np.ndarray
    releases: np.ndarray

    @staticmethod
    def hire_only(hires: np.ndarray) -> "Decision":
        h = np.asarray(hires, float)
        return Decision(h, np.zeros_like(h))


def play(policy, inst: Instance, sequence: PredictionSequence) -> StaffingPlan:
    """Drive a policy over a full sequence; returns the realized plan."""
    n, T = inst.availability.shape
    hires = np.zeros((n, T))
    releases = np.zeros((n, T))
    for t in range(1, T + 1):
        d = policy.step(DayObservation(day=t, interval=sequence.interval(t)))
        hires[:, t - 1] = d.hires
        releases[:, t - 1] = d.releases
    return StaffingPlan(hires, releases)


# --- Warm-up: greedy staffing with a target overstaffing cost ---------------

class GreedyTargetPolicy:
    """Single-pool greedy: hire to the moving cap L_t + gamma/C while supply
    lasts.  Needs perfectly consistent nested forecasts."""

    kind = "greedy_target"

    def __init__(self, inst: Instance, gamma: float):
        if not inst.single_pool():
            raise MultiPoolUnsupported("greedy target staffing is single-pool")
        if np.any(inst.inconsistency != 0):
            raise InstanceError("greedy target staffing assumes eps = 0")
        self.inst = inst
        self.gamma = float(gamma)
        self.day = 0
        self.usage = 0.0            # initial-pool units consumed
        self.prev_lo = None

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        t = self.day
        inst = self.inst
        rho_t = float(inst.availability[0, t - 1])
        available = max(0.0, rho_t * (float(inst.pool_sizes[0]) - self.usage))
        if t == 1:
            want = obs.interval.lo + self.gamma / inst.over_cost
        else:
            if obs.interval.lo < self.prev_lo - 1e-9:
                raise InstanceError("greedy target staffing needs nested "
                                    "forecasts (nondecreasing lower bounds)")
            want = obs.interval.lo - self.prev_lo
        hire = min(max(0.0, want), available)
        if rho_t > 0:
            self.usage += hire / rho_t
        self.prev_lo = obs.interval.lo
        return Decision.hire_only(np.array([hire]))


def greedy_target_overstaffing(inst: Instance, gamma: float,
                               sequence: PredictionSequence) -> StaffingPlan:
    """Run the greedy policy against a full sequence."""
    return play(GreedyTargetPolicy(inst, gamma), inst, sequence)


# --- Fixed-point characterizations of the optimal cost ----------------------

@dataclass(frozen=True)
class FixedPointResult:
    gamma_star: float
    branch: str                  # "low_supply" | "fixed_point"
    t_dagger: int


def _clamped_single_pool(inst: Instance) -> Instance:
    """Normalize to the WLOG setting: nonincreasing error bounds capped by
    the initial width (running-min clamp, documented and reversible)."""
    deltas = np.minimum.accumulate(np.minimum(inst.error_bounds, inst.delta0))
    from .model import make_instance
    return make_instance(inst.pool_sizes, inst.availability,
                         inst.initial_range, deltas,
                         under_cost=inst.under_cost, over_cost=inst.over_cost)


def _greedy_understaffing(inst: Instance, gamma: float) -> Tuple[float, int]:
    """Understaffing cost of the greedy under the supply-draining sequence.

    Returns (cost, last hiring day).  Assumes the clamped single-pool form.
    """
    lo0, hi0 = inst.initial_range
    s = float(inst.pool_sizes[0])
    rho = inst.availability[0]
    total = 0.0
    usage = 0.0
    prev_lo = None
    t_last = 1
    for t in range(1, inst.horizon + 1):
        lo_t = hi0 - inst.delta(t)
        available = max(0.0, rho[t - 1] * (s - usage))
        want = (lo_t + gamma / inst.over_cost) if t == 1 else lo_t - prev_lo
        hire = min(max(0.0, want), available)
        if hire > 1e-15:
            t_last = t
        if rho[t - 1] > 0:
            usage += hire / rho[t - 1]
        total += hire
        prev_lo = lo_t
    return inst.under_cost * max(0.0, hi0 - total), t_last


def gamma_star_single_pool(inst: Instance, tol: float = 1e-9
                           ) -> FixedPointResult:
    """Optimal minimax cost of a single-pool instance via the fixed point.

    Either the low-supply branch fires (all supply hired on day 1 and the
    understaffing still dominates) or gamma* is the fixed point of the
    weakly decreasing worst-case-understaffing map, found by bisection.
    """
    if not inst.single_pool():
        raise MultiPoolUnsupported("fixed-point characterization is "
                                   "single-pool")
    if np.any(inst.inconsistency != 0):
        raise InstanceError("fixed-point characterization assumes eps = 0")
    work = _clamped_single_pool(inst)
    lo0, hi0 = work.initial_range
    rho1 = float(work.availability[0, 0])
    s = float(work.pool_sizes[0])
    lbar1 = hi0 - work.delta(1)
    gamma_hi = work.over_cost * (rho1 * s - lbar1)

    def underst(g):
        return _greedy_understaffing(work, g)[0]

    if gamma_hi <= 0 or underst(gamma_hi) > gamma_hi:
        gamma = work.under_cost * (hi0 - rho1 * s)
        return FixedPointResult(gamma, "low_supply", 1)
    lo_g, hi_g = 0.0, min(gamma_hi, work.under_cost * (hi0 - lo0))
    if underst(hi_g) > hi_g:       # cap above gamma_hi was too aggressive
        hi_g = gamma_hi
    if underst(lo_g) <= lo_g:
        gamma = lo_g
    else:
        while hi_g - lo_g > tol:
            mid = 0.5 * (lo_g + hi_g)
            if underst(mid) > mid:
                lo_g = mid
            else:
                hi_g = mid
        gamma = 0.5 * (lo_g + hi_g)
    return FixedPointResult(gamma, "fixed_point",
                            _greedy_understaffing(work, gamma)[1])


def t_dagger_formula(s, eta, delta, T, C, gamma) -> Optional[int]:
    """Closed-form last hiring day; None where the display degenerates.

    Valid on the sufficient-supply domain gamma <= C (eta s - delta^(T-1))
    with delta * eta < 1; returns None outside it (callers fall back to the
    defining supply-inequality scan).
    """
    denom = -math.log(delta) - math.log(eta)
    if denom <= 1e-12:
        return None
    head = eta * s - gamma / C - delta ** (T - 1)
    if head < 0:
        return None
    q = head * delta ** (1 - T) / (1.0 - delta) * (1.0 - delta * eta) + 1.0
    if q <= 0:
        return None
    return min(math.ceil(math.log(q) / denom + 1.0), T)


def _t_dagger_scan(s, eta, delta, T, C, gamma) -> int:
    """Last hiring day from the defining supply inequality (always valid)."""
    used = (delta ** (T - 1) + gamma / C) / eta
    if used > s:
        return 1
    for t in range(2, T + 1):
        used += delta ** (T - t) * (1.0 - delta) / eta ** t
        if used > s:
            return t
    return T


def gamma_star_closed_form(s: float, eta: float, delta: float, T: int,
                           c: float = 1.0, C: float = 1.0,
                           tol: float = 1e-9) -> float:
    """Optimal cost for the stylized family rho_t = eta^t,
    Delta_t = 1 - delta^(T-t), demand range [0, 1].

    Low supply gives the explicit c * (1 - eta * s); otherwise the scalar
    fixed-point equation is solved by bisection with the integer last hiring
    day recomputed inside.  Geometric sums are evaluated term by term so the
    delta * eta = 1 degeneracy of the displayed form never arises; the
    supply-never-exhausts boundary case clamps the final-day hire at the
    greedy increment.
    """
    if not (eta > 0):
        raise ParameterOutOfRange(f"eta must be positive, got {eta}")
    if not (0 < delta < 1):
        raise ParameterOutOfRange(f"delta must lie in (0, 1), got {delta}")
    if T < 1 or s < 0 or c <= 0 or C <= 0:
        raise ParameterOutOfRange("need T >= 1, s >= 0, c > 0, C > 0")
    if s <= (c + C * delta ** (T - 1)) / ((c + C) * eta):
        return c * (1.0 - eta * s)

    lbar = [delta ** (T - t) for t in range(0, T + 1)]   # lbar[t], lbar[0] unused

    def underst(gamma: float) -> float:
        td = _t_dagger_scan(s, eta, delta, T, C, gamma)
        if td == 1:
            total = min(lbar[1] + gamma / C, eta * s)
        else:
            used = (lbar[1] + gamma / C) / eta + sum(
                (lbar[t] - lbar[t - 1]) / eta ** t for t in range(2, td))
            before = lbar[td - 1] + gamma / C
            blue = min(eta ** td * max(0.0, s - used),
                       max(0.0, lbar[td] - lbar[td - 1]))
            total = before + blue
        return c * max(0.0, 1.0 - total)

    gamma_hi = C * (eta * s - delta ** (T - 1))
    hi_g = min(gamma_hi, c)
    if underst(hi_g) > hi_g:
        hi_g = gamma_hi
    lo_g = 0.0
    if underst(lo_g) <= lo_g:
        return 0.0
    while hi_g - lo_g > tol:
        mid = 0.5 * (lo_g + hi_g)
        if underst(mid) > mid:
            lo_g = mid
        else:
            hi_g = mid
    return 0.5 * (lo_g + hi_g)


# --- LP-backed minimax-optimal policies --------------------------------------

class LpEmulatorPolicy:
    """Solve the base program once, then emulate its canonical profile."""

    kind = "lp_emulator"

    def __init__(self, inst: Instance, canonical: Optional[np.ndarray] = None,
                 gamma_star: Optional[float] = None):
        self.inst = inst
        if canonical is None:
            gamma_star, canonical = minimax_value_and_profile(inst)
        self.canonical = canonical
        self.gamma_star = gamma_star
        n, T = inst.availability.shape
        self.realized = np.zeros((n, T))
        self.r_hat = inst.initial_range[1]
        self.day = 0

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        t = self.day
        inst = self.inst
        self.r_hat = min(self.r_hat, obs.interval.hi + inst.eps(t))
        hires = emulator_step(self.canonical, self.realized, t, self.r_hat,
                              inst.initial_range[1],
                              inst.availability[:, t - 1])
        self.realized[:, t - 1] = hires
        return Decision.hire_only(hires)


def lp_emulator_policy(inst: Instance) -> LpEmulatorPolicy:
    return LpEmulatorPolicy(inst)


class LpResolvingPolicy:
    """Rebuild and re-solve the program each day on the remaining horizon,
    then play its first-day block."""

    kind = "lp_resolving"

    def __init__(self, inst: Instance):
        self.inst = inst
        self.state = fresh_state(inst)
        self.day = 0
        self.gamma_star = None       # day-1 program value, set on first step

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        t = self.day
        inst = self.inst
        st = self.state
        lo_bar, hi_bar = st.interval
        hi_bar = min(hi_bar, obs.interval.hi + inst.eps(t))
        lo_bar = max(lo_bar, obs.interval.lo - inst.eps(t))
        lo_bar = min(lo_bar, hi_bar)     # inconsistent input guard
        st = replace(st, index=t, interval=(lo_bar, hi_bar))
        built = build_lp_resolving(inst, st, t)
        sol = solve_canonical(built, refine_limit=1)
        if self.gamma_star is None:
            self.gamma_star = sol.objective
        n = inst.n_pools
        hires = np.zeros(n)
        for i in range(n):
            v = built.x_index.get((i, t))
            if v is not None:
                hires[i] = sol.x[v]
        rho_t = st.availability[:, t - 1]
        new_supply = np.maximum(rho_t * st.remaining_supply - hires, 0.0)
        new_avail = st.availability.copy()
        for i in range(n):
            if rho_t[i] > 0:
                new_avail[i, t:] = new_avail[i, t:] / rho_t[i]
            else:
                new_avail[i, t:] = 0.0
        self.state = EpochState(
            index=t + 1, cum_hires=st.cum_hires + hires,
            remaining_supply=new_supply, remaining_budget=st.remaining_budget,
            interval=(lo_bar, hi_bar), availability=new_avail)
        return Decision.hire_only(hires)


def lp_resolving_policy(inst: Instance) -> LpResolvingPolicy:
    return LpResolvingPolicy(inst)


class MultiStationPolicy:
    """Per-station emulation of the multi-station program's canonical block.

    Station j's hires depend only on station j's predictions, so stations
    can be stepped with a vector of intervals each day.
    """

    kind = "multi_station"

    def __init__(self, msi: MultiStationInstance):
        self.msi = msi
        built = build_lp_multi_station(msi)
        sol = solve_canonical(built)
        self.objective = sol.objective
        self.canonical = extract_canonical(built, sol)    # (n, m, T)
        n, m, T = self.canonical.shape
        self.realized = np.zeros((n, m, T))
        self.r_hat = np.array([st.initial_range[1] for st in msi.stations])
        self.day = 0

    def step_multi(self, intervals: Sequence[PredictionInterval]) -> np.ndarray:
        self.day += 1
        t = self.day
        msi = self.msi
        out = np.zeros((msi.n_pools, msi.n_stations))
        for j, iv in enumerate(intervals):
            self.r_hat[j] = min(self.r_hat[j], iv.hi)
            hires = emulator_step(
                self.canonical[:, j, :], self.realized[:, j, :], t,
                float(self.r_hat[j]), self.msi.stations[j].initial_range[1],
                msi.availability[:, t - 1])
            self.realized[:, j, t - 1] = hires
            out[:, j] = hires
        return out


def play_multi(policy: MultiStationPolicy, msi: MultiStationInstance,
               sequences: Sequence[PredictionSequence]) -> List[StaffingPlan]:
    n, T = msi.availability.shape
    hires = np.zeros((n, msi.n_stations, T))
    for t in range(1, T + 1):
        hires[:, :, t - 1] = policy.step_multi(
            [seq.interval(t) for seq in sequences])
    return [StaffingPlan.of(hires[:, j, :]) for j in range(msi.n_stations)]


class JointCostPolicy:
    """Emulate the joint-cost program's canonical profile (wage-aware)."""

    kind = "joint"

    def __init__(self, ri: ReleaseInstance):
        self.ri = ri
        built = build_lp_joint_cost(ri)
        sol = solve_canonical(built)
        self.objective = sol.objective
        self.canonical = extract_canonical(built, sol)
        inst = ri.base
        self.inst = inst
        self.realized = np.zeros_like(self.canonical)
        self.r_hat = inst.initial_range[1]
        self.day = 0

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        t = self.day
        self.r_hat = min(self.r_hat, obs.interval.hi)
        hires = emulator_step(self.canonical, self.realized, t, self.r_hat,
                              self.inst.initial_range[1],
                              self.inst.availability[:, t - 1])
        self.realized[:, t - 1] = hires
        return Decision.hire_only(hires)


def joint_cost_policy(ri: ReleaseInstance) -> JointCostPolicy:
    return JointCostPolicy(ri)


class ReleasePolicy:
    """Costly-release policy: per epoch, update the state, re-solve the
    configuration program, emulate its canonical hires, and apply the
    critical-index release rule on the epoch's last day."""

    kind = "release"

    def __init__(self, ri: ReleaseInstance, config_cap: int = 100_000):
        validate_release_instance(ri)
        self.ri = ri
        self.config_cap = config_cap
        self.state = fresh_state(ri.base, ri.budget, ri.pre_hires)
        self.day = 0
        self.runner: Optional[EpochRunner] = None
        self.objective = None        # day-0 program value, set on first step

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        t = self.day
        ri = self.ri
        if self.runner is None:
            built = build_lp_release(ri, self.state, self.config_cap)
            sol = solve_canonical(built)
            if self.objective is None:
                self.objective = sol.objective
            canon_x, canon_y = extract_canonical(built, sol)
            self.runner = EpochRunner(ri, self.state, canon_x, canon_y)
        hires = self.runner.observe(obs.interval)
        n = ri.base.n_pools
        releases = np.zeros(n)
        t0, t_end = ri.epoch_range(self.state.index)
        if t == t_end:
            releases, _k, next_state = self.runner.finish()
            self.runner = None
            if next_state is not None:
                self.state = next_state
        return Decision(hires, releases)


def release_policy(ri: ReleaseInstance, config_cap: int = 100_000
                   ) -> ReleasePolicy:
    return ReleasePolicy(ri, config_cap)


class MiscoverageWrapper:
    """Shock-aware wrapper for the base emulator (single pool).

    detect_before_hiring: hire nothing on shocked days; on clean days replay
    the emulator over the repaired history (each shocked day's interval is
    replaced by the next clean day's interval) and play its current-day
    hire.  no_detect: run the base policy unmodified.
    """

    kind = "miscoverage_wrapper"

    def __init__(self, base, scenario: str, shocked: Sequence[bool]):
        if not isinstance(base, LpEmulatorPolicy):
            raise UnsupportedBase("wrapper supports the base LP emulator only")
        if not base.inst.single_pool():
            raise UnsupportedBase("wrapper is single-pool")
        if np.any(base.inst.inconsistency != 0):
            raise UnsupportedBase("wrapper assumes eps = 0 forecasts")
        if scenario not in ("detect_before_hiring", "no_detect"):
            raise ValueError(f"unknown scenario {scenario!r}")
        self.base = base
        self.inst = base.inst
        self.scenario = scenario
        self.shocked = list(bool(b) for b in shocked)
        self.seen: List[PredictionInterval] = []
        self.day = 0

    def _repaired_history(self, t: int) -> List[PredictionInterval]:
        """Intervals with each shocked day mapped to its next clean day."""
        out = []
        for tau in range(t):
            k = tau
            while self.shocked[k]:
                k += 1             # day t-1 (0-based) is clean by caller
            out.append(self.seen[k])
        return out

    def step(self, obs: DayObservation) -> Decision:
        if self.scenario == "no_detect":
            return self.base.step(obs)
        self.day += 1
        t = self.day
        self.seen.append(obs.interval)
        if self.shocked[t - 1]:
            return Decision.hire_only(np.zeros(self.inst.n_pools))
        inst = self.inst
        history = self._repaired_history(t)
        realized = np.zeros_like(self.base.canonical)
        r_hat = inst.initial_range[1]
        hires = np.zeros(inst.n_pools)
        for tau, iv in enumerate(history, start=1):
            r_hat = min(r_hat, iv.hi)
            hires = emulator_step(self.base.canonical, realized, tau, r_hat,
                                  inst.initial_range[1],
                                  inst.availability[:, tau - 1])
            realized[:, tau - 1] = hires
        return Decision.hire_only(hires)


def miscoverage_wrapper(base, scenario: str, shocked: Sequence[bool]
                        ) -> MiscoverageWrapper:
    return MiscoverageWrapper(base, scenario, shocked)


class ClairvoyantPolicy:
    """Testing aid: best response after seeing the demand (not online)."""

    kind = "clairvoyant"
    clairvoyant = True

    def __init__(self, inst: Instance):
        self.inst = inst

    def worst_case_for(self, inst: Instance, sequence: PredictionSequence
                       ) -> Tuple[float, float]:
        max_total = float((inst.availability[:, 0] * inst.pool_sizes).sum())
        hi = float(sequence.effective_hi[-1])
        cost = inst.under_cost * max(0.0, hi - max_total)
        return cost, hi
