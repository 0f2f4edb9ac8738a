"""Builders for every staffing linear program, plus canonical extraction.

Four program families share one skeleton (hire variables, supply rows,
overstaffing caps per adversary switch day, an understaffing floor):

* single-switch program: one demand, cost target gamma;
* resolving program: the same model restarted from a mid-horizon state;
* multi-station program: per-station gammas aggregated by max or sum;
* joint-cost program: hiring wages folded into a piecewise-linear objective;
* release configuration program: one scenario per multi-switch configuration,
  with hire/release variables deduplicated by shared prediction prefixes.

Optimal solutions are refined to a canonical representative (earliest-maximal
hiring, minimal canonical releases) so that downstream equalities between
policies do not depend on simplex pivoting accidents.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .lp import LpModel, LpSolution, refine_lexicographic, solve_lp
from .model import (EpochState, Instance, InstanceError, MultiStationInstance,
                    ReleaseInstance, UNLIMITED, fresh_state)


class ConfigurationExplosion(Exception):
    """Release program would need more configurations than the cap allows."""


class InfeasibleState(InstanceError):
    """Resolving state is inconsistent with any feasible continuation."""


def single_switch_floor(inst: Instance, k: int) -> float:
    """Left endpoint the switch-at-k adversary settles on.

    max over tau in [0:k] of (R0 - Delta_tau - 2 eps_tau); tau = 0 uses the
    initial-range width, so the floor is never below L0.
    """
    lo, hi = inst.initial_range
    # The tau = 0 term is hi - Delta_0 - 2 eps_0 = lo exactly.
    return max([lo] + [hi - inst.delta(tau) - 2.0 * inst.eps(tau)
                       for tau in range(1, k + 1)])


def _require_positive_slopes(under_cost: float, over_cost: float) -> None:
    if under_cost <= 0 or over_cost <= 0:
        raise InstanceError("gamma-form programs need strictly positive "
                            "cost slopes")


@dataclass
class SingleSwitchLp:
    model: LpModel
    inst: Instance
    x_index: Dict[Tuple[int, int], int]     # (pool i, day t) -> variable
    gamma: int
    day_range: Tuple[int, int]               # decided days [t0, T]
    cum_hired: float = 0.0                   # constant added to totals


def build_lp_single_switch(inst: Instance) -> SingleSwitchLp:
    """Program with variables {x_it, gamma} and n + T + 1 constraints.

    Supply rows per pool; for each switch day k a cap
      sum_{t<=k} sum_i x_it <= floor_k + gamma / C
    and one understaffing floor sum x >= R0 - gamma / c.
    """
    _require_positive_slopes(inst.under_cost, inst.over_cost)
    n, T = inst.availability.shape
    lo0, hi0 = inst.initial_range
    m = LpModel(name="single_switch")
    x_index = {}
    for i in range(n):
        for t in range(1, T + 1):
            if inst.availability[i, t - 1] > 0:
                x_index[(i, t)] = m.add_var(f"x[{i},{t}]")
    gamma = m.add_var("gamma", obj=1.0)

    for i in range(n):
        coeffs = {x_index[(i, t)]: 1.0 / inst.availability[i, t - 1]
                  for t in range(1, T + 1) if (i, t) in x_index}
        m.add_row(coeffs, "<=", float(inst.pool_sizes[i]))
    for k in range(1, T + 1):
        coeffs = {v: 1.0 for (i, t), v in x_index.items() if t <= k}
        coeffs[gamma] = -1.0 / inst.over_cost
        m.add_row(coeffs, "<=", single_switch_floor(inst, k))
    coeffs = {v: 1.0 for v in x_index.values()}
    coeffs[gamma] = 1.0 / inst.under_cost
    m.add_row(coeffs, ">=", hi0)
    return SingleSwitchLp(m, inst, x_index, gamma, (1, T))


def build_lp_resolving(inst: Instance, state: EpochState, day: int
                       ) -> SingleSwitchLp:
    """The single-switch program for the subproblem starting at `day`.

    Uses the carried state: cumulative hires shift the cap and floor rows,
    remaining supply and rescaled availability replace the originals, and the
    carried interval supplies the subproblem's day-0 term.  With a fresh
    state at day 1 this reproduces build_lp_single_switch exactly.
    """
    _require_positive_slopes(inst.under_cost, inst.over_cost)
    n, T = inst.availability.shape
    if not (1 <= day <= T):
        raise InfeasibleState(f"day {day} outside horizon")
    if np.any(state.remaining_supply < -1e-9):
        raise InfeasibleState("negative remaining supply")
    lo_bar, hi_bar = state.interval
    if lo_bar > hi_bar + 1e-9:
        raise InfeasibleState("carried interval is empty")
    rho = state.availability
    z_total = float(state.cum_hires.sum())

    m = LpModel(name=f"resolving[{day}]")
    x_index = {}
    for i in range(n):
        for t in range(day, T + 1):
            if rho[i, t - 1] > 0:
                x_index[(i, t)] = m.add_var(f"x[{i},{t}]")
    gamma = m.add_var("gamma", obj=1.0)

    for i in range(n):
        coeffs = {x_index[(i, t)]: 1.0 / rho[i, t - 1]
                  for t in range(day, T + 1) if (i, t) in x_index}
        m.add_row(coeffs, "<=", float(state.remaining_supply[i]))
    for k in range(day, T + 1):
        floor = max([lo_bar] + [hi_bar - inst.delta(tau) - 2.0 * inst.eps(tau)
                                for tau in range(day, k + 1)])
        coeffs = {v: 1.0 for (i, t), v in x_index.items() if t <= k}
        coeffs[gamma] = -1.0 / inst.over_cost
        m.add_row(coeffs, "<=", floor - z_total)
    coeffs = {v: 1.0 for v in x_index.values()}
    coeffs[gamma] = 1.0 / inst.under_cost
    m.add_row(coeffs, ">=", hi_bar - z_total)
    return SingleSwitchLp(m, inst, x_index, gamma, (day, T), z_total)


@dataclass
class MultiStationLp:
    model: LpModel
    msi: MultiStationInstance
    x_index: Dict[Tuple[int, int, int], int]    # (pool i, station j, day t)
    gamma_index: List[int]
    epigraph: Optional[int]


def build_lp_multi_station(msi: MultiStationInstance) -> MultiStationLp:
    """Shared-pool generalization with per-station gammas.

    Psi = max is linearized with an epigraph variable u >= gamma_j; Psi = sum
    goes into the objective directly.  Station forecasts are perfectly
    consistent here (eps = 0), matching the extension model.
    """
    n, T = msi.availability.shape
    m = LpModel(name=f"multi_station[{msi.objective}]")
    x_index = {}
    for i in range(n):
        for j in range(msi.n_stations):
            for t in range(1, T + 1):
                if msi.availability[i, t - 1] > 0:
                    x_index[(i, j, t)] = m.add_var(f"x[{i},{j},{t}]")
    is_sum = msi.objective == "sum"
    gamma_index = [m.add_var(f"gamma[{j}]", obj=1.0 if is_sum else 0.0)
                   for j in range(msi.n_stations)]
    epigraph = None if is_sum else m.add_var("psi", obj=1.0)

    for i in range(n):
        coeffs = {}
        for j in range(msi.n_stations):
            for t in range(1, T + 1):
                v = x_index.get((i, j, t))
                if v is not None:
                    coeffs[v] = 1.0 / msi.availability[i, t - 1]
        m.add_row(coeffs, "<=", float(msi.pool_sizes[i]))
    for j, st in enumerate(msi.stations):
        _require_positive_slopes(st.under_cost, st.over_cost)
        lo0, hi0 = st.initial_range
        for k in range(1, T + 1):
            floor = max(hi0 - st.delta(tau) for tau in range(0, k + 1))
            coeffs = {v: 1.0 for (i, jj, t), v in x_index.items()
                      if jj == j and t <= k}
            coeffs[gamma_index[j]] = -1.0 / st.over_cost
            m.add_row(coeffs, "<=", floor)
        coeffs = {v: 1.0 for (i, jj, t), v in x_index.items() if jj == j}
        coeffs[gamma_index[j]] = 1.0 / st.under_cost
        m.add_row(coeffs, ">=", hi0)
        if epigraph is not None:
            m.add_row({gamma_index[j]: 1.0, epigraph: -1.0}, "<=", 0.0)
    return MultiStationLp(m, msi, x_index, gamma_index, epigraph)


@dataclass
class JointLp:
    model: LpModel
    ri: ReleaseInstance
    x_index: Dict[Tuple[int, int], int]
    lam_index: List[int]        # lam_index[k-1] for k in 1..T
    theta: int
    epigraph: int


def build_lp_joint_cost(ri: ReleaseInstance) -> JointLp:
    """Wage-aware program: minimize the worst of T + 1 affine cost pieces.

    Piece 0 is understaffing plus the full wage bill; piece k is overstaffing
    after a switch at k plus wages paid through day k.  Releases and budgets
    do not exist in joint mode.
    """
    inst = ri.base
    if ri.budget is not UNLIMITED:
        raise InstanceError("joint-cost mode has no budget")
    if any(q is not UNLIMITED for q in ri.release_fees):
        raise InstanceError("joint-cost mode has no releasing")
    if np.any(inst.inconsistency != 0):
        raise InstanceError("joint-cost mode assumes perfectly consistent "
                            "forecasts (eps = 0)")
    n, T = inst.availability.shape
    lo0, hi0 = inst.initial_range
    p = ri.wages
    m = LpModel(name="joint_cost")
    x_index = {}
    for i in range(n):
        for t in range(1, T + 1):
            if inst.availability[i, t - 1] > 0:
                x_index[(i, t)] = m.add_var(f"x[{i},{t}]")
    lam_index = [m.add_var(f"lam[{k}]") for k in range(1, T + 1)]
    theta = m.add_var("theta")
    epigraph = m.add_var("objective", obj=1.0)

    for i in range(n):
        coeffs = {x_index[(i, t)]: 1.0 / inst.availability[i, t - 1]
                  for t in range(1, T + 1) if (i, t) in x_index}
        m.add_row(coeffs, "<=", float(inst.pool_sizes[i]))
    for k in range(1, T + 1):
        floor = max(hi0 - inst.delta(tau) for tau in range(0, k + 1))
        coeffs = {v: 1.0 for (i, t), v in x_index.items() if t <= k}
        coeffs[lam_index[k - 1]] = -1.0
        m.add_row(coeffs, "<=", floor)
    coeffs = {v: 1.0 for v in x_index.values()}
    coeffs[theta] = 1.0
    m.add_row(coeffs, ">=", hi0)
    # Epigraph pieces.
    coeffs = {x_index[(i, t)]: float(p[i, t - 1])
              for (i, t) in x_index if p[i, t - 1] != 0}
    coeffs[theta] = coeffs.get(theta, 0.0) + inst.under_cost
    coeffs[epigraph] = -1.0
    m.add_row(coeffs, "<=", 0.0)
    for k in range(1, T + 1):
        coeffs = {x_index[(i, t)]: float(p[i, t - 1])
                  for (i, t) in x_index if t <= k and p[i, t - 1] != 0}
        coeffs[lam_index[k - 1]] = inst.over_cost
        coeffs[epigraph] = coeffs.get(epigraph, 0.0) - 1.0
        m.add_row(coeffs, "<=", 0.0)
    return JointLp(m, ri, x_index, lam_index, theta, epigraph)


# --- Release configuration program ------------------------------------------

def epoch_closed_ranges(ri: ReleaseInstance, first_epoch: int) -> List[Tuple[int, int]]:
    """Closed switch-day ranges [t_{l-1}, t_l] for epochs first_epoch..L."""
    return [ri.epoch_range(ell) for ell in range(first_epoch, ri.n_epochs + 1)]


def configuration_space(ranges: List[Tuple[int, int]], cap: int
                        ) -> List[Tuple[int, ...]]:
    count = 1
    for lo, hi in ranges:
        count *= hi - lo + 1
    if count > cap:
        raise ConfigurationExplosion(
            f"{count} configurations exceed the cap {cap}")
    return list(itertools.product(*[range(lo, hi + 1) for lo, hi in ranges]))


def configuration_endpoints(ri: ReleaseInstance, state: EpochState,
                            config: Tuple[int, ...]) -> Tuple[float, float]:
    """(L_T, R_T) of the multi-switch sequence encoded by a configuration."""
    inst = ri.base
    first = state.index
    lo, hi = state.interval
    t0 = ri.epoch_range(first)[0]
    for idx, ell in enumerate(range(first, ri.n_epochs + 1)):
        lo_e, hi_e = ri.epoch_range(ell)
        switch = config[idx]
        for t in range(max(lo_e, t0) + 1, hi_e + 1):
            if t <= switch:
                lo, hi = hi - inst.delta(t), hi
            else:
                lo, hi = lo, lo + inst.delta(t)
    return lo, hi


@dataclass
class ReleaseLp:
    model: LpModel
    ri: ReleaseInstance
    state: EpochState
    ranges: List[Tuple[int, int]]             # closed ranges, epochs ell..L
    configs: List[Tuple[int, ...]]
    x_index: Dict[Tuple[int, int, tuple], int]   # (i, t, xkey)
    y_index: Dict[Tuple[int, int, tuple], int]   # (i, epoch offset, prefix)
    lam_index: Dict[Tuple[int, ...], int]
    theta_index: Dict[Tuple[int, ...], int]
    epigraph: int

    def x_key(self, t: int, config: Tuple[int, ...]) -> tuple:
        """Deduplication key: shared prediction prefix seen by day t."""
        e = 0
        while t > self.ranges[e][1]:
            e += 1
        prefix = config[:e]
        return (prefix, min(config[e], t))

    def x_var(self, i: int, t: int, config: Tuple[int, ...]) -> Optional[int]:
        return self.x_index.get((i, t, self.x_key(t, config)))


def build_lp_release(ri: ReleaseInstance, state: Optional[EpochState] = None,
                     config_cap: int = 100_000) -> ReleaseLp:
    """Configuration program for the costly hiring and releasing model.

    One scenario per configuration (one switch day per epoch).  Variables are
    deduplicated by shared prediction prefix, which makes the identical
    allocation and identical cancellation constraints hold by construction.
    Epochs with the infinite-fee sentinel get no release variables; an
    unlimited budget omits the budget row.
    """
    inst = ri.base
    if state is None:
        state = fresh_state(inst, ri.budget, ri.pre_hires)
    first = state.index
    ranges = epoch_closed_ranges(ri, first)
    configs = configuration_space(ranges, config_cap)
    n, T = inst.availability.shape
    t0 = ranges[0][0]
    rho = state.availability
    z = state.cum_hires
    z_total = float(z.sum())
    c, C = inst.under_cost, inst.over_cost

    lp = ReleaseLp(LpModel(name=f"release[{first}]"), ri, state, ranges,
                   configs, {}, {}, {}, {}, -1)
    m = lp.model

    # Hire variables, one per (pool, day, shared prefix key).
    for cfg in configs:
        for t in range(t0 + 1, T + 1):
            key = lp.x_key(t, cfg)
            for i in range(n):
                if rho[i, t - 1] > 0 and (i, t, key) not in lp.x_index:
                    lp.x_index[(i, t, key)] = m.add_var(
                        f"x[{i},{t}|{key}]")
    # Release variables, one per (pool, epoch, configuration prefix).
    for cfg in configs:
        for e, ell in enumerate(range(first, ri.n_epochs + 1)):
            if ri.release_fees[ell - 1] is UNLIMITED:
                continue
            prefix = cfg[:e + 1]
            for i in range(n):
                if (i, e, prefix) not in lp.y_index:
                    lp.y_index[(i, e, prefix)] = m.add_var(
                        f"y[{i},{ell}|{prefix}]")
    for cfg in configs:
        lp.lam_index[cfg] = m.add_var(f"lam{cfg}")
        lp.theta_index[cfg] = m.add_var(f"theta{cfg}")
    lp.epigraph = m.add_var("objective", obj=1.0)

    seen_rows = set()

    def add_row(coeffs, rel, rhs):
        items = tuple(sorted((j, a) for j, a in coeffs.items() if a != 0.0))
        sig = (items, rel, float(rhs))
        if sig not in seen_rows:
            seen_rows.add(sig)
            m.add_row(coeffs, rel, rhs)

    for cfg in configs:
        add_row({lp.theta_index[cfg]: c, lp.epigraph: -1.0}, "<=", 0.0)
        add_row({lp.lam_index[cfg]: C, lp.epigraph: -1.0}, "<=", 0.0)
        # Supply feasibility under this scenario.
        for i in range(n):
            coeffs = {}
            for t in range(t0 + 1, T + 1):
                v = lp.x_var(i, t, cfg)
                if v is not None:
                    coeffs[v] = 1.0 / rho[i, t - 1]
            add_row(coeffs, "<=", float(state.remaining_supply[i]))
        # Budget feasibility.
        if state.remaining_budget is not UNLIMITED:
            coeffs = {}
            for i in range(n):
                for t in range(t0 + 1, T + 1):
                    v = lp.x_var(i, t, cfg)
                    if v is not None and ri.wages[i, t - 1] != 0:
                        coeffs[v] = coeffs.get(v, 0.0) + float(
                            ri.wages[i, t - 1])
            for e, ell in enumerate(range(first, ri.n_epochs + 1)):
                fee = ri.release_fees[ell - 1]
                if fee is UNLIMITED:
                    continue
                for i in range(n):
                    v = lp.y_index[(i, e, cfg[:e + 1])]
                    coeffs[v] = coeffs.get(v, 0.0) + float(fee)
            add_row(coeffs, "<=", float(state.remaining_budget))
        # Releasing feasibility: cumulative releases within cumulative hires.
        for e, ell in enumerate(range(first, ri.n_epochs + 1)):
            t_end = ri.epoch_range(ell)[1]
            for i in range(n):
                coeffs = {}
                any_y = False
                for e2 in range(e + 1):
                    key = (i, e2, cfg[:e2 + 1])
                    if key in lp.y_index:
                        coeffs[lp.y_index[key]] = 1.0
                        any_y = True
                if not any_y:
                    continue
                for t in range(t0 + 1, t_end + 1):
                    v = lp.x_var(i, t, cfg)
                    if v is not None:
                        coeffs[v] = coeffs.get(v, 0.0) - 1.0
                add_row(coeffs, "<=", float(z[i]))
        # Bounded overstaffing / understaffing at the horizon.
        lo_T, hi_T = configuration_endpoints(ri, state, cfg)
        net = {}
        for i in range(n):
            for t in range(t0 + 1, T + 1):
                v = lp.x_var(i, t, cfg)
                if v is not None:
                    net[v] = net.get(v, 0.0) + 1.0
            for e in range(len(ranges)):
                key = (i, e, cfg[:e + 1])
                if key in lp.y_index:
                    net[lp.y_index[key]] = net.get(lp.y_index[key], 0.0) - 1.0
        over = dict(net)
        over[lp.lam_index[cfg]] = over.get(lp.lam_index[cfg], 0.0) - 1.0
        add_row(over, "<=", lo_T - z_total)
        under = dict(net)
        under[lp.theta_index[cfg]] = under.get(lp.theta_index[cfg], 0.0) + 1.0
        add_row(under, ">=", hi_T - z_total)
    return lp


# --- Canonical solutions -----------------------------------------------------

def _refine_day_pool(model_x_index, built_model, sol, day_range, n,
                     limit=None):
    targets = []
    lo, hi = day_range
    if limit is not None:
        hi = min(hi, lo + limit - 1)
    for t in range(lo, hi + 1):
        day_vars = [model_x_index[(i, t)] for i in range(n)
                    if (i, t) in model_x_index]
        if day_vars:
            targets.append(({v: 1.0 for v in day_vars}, "max"))
            if len(day_vars) > 1:
                targets.extend(({v: 1.0}, "max") for v in day_vars)
    return refine_lexicographic(built_model, sol, targets) if targets else sol


def solve_canonical(built, refine: bool = True,
                    refine_limit: Optional[int] = None) -> LpSolution:
    """Solve a built program and canonicalize the optimal solution.

    Hiring blocks are refined to hire as much as early as possible (day by
    day, then pool by pool); release programs additionally shrink canonical
    releases to their minimum.  Every refined solution is still optimal.
    refine_limit caps how many leading days are refined (resolving policies
    only play the first block, so refining one day suffices there).
    """
    sol = solve_lp(built.model)
    if not refine:
        return sol
    if isinstance(built, SingleSwitchLp):
        return _refine_day_pool(built.x_index, built.model, sol,
                                built.day_range, built.inst.n_pools,
                                refine_limit)
    if isinstance(built, JointLp):
        n, T = built.ri.base.availability.shape
        return _refine_day_pool(built.x_index, built.model, sol, (1, T), n,
                                refine_limit)
    if isinstance(built, MultiStationLp):
        msi = built.msi
        # First shrink every per-station cost to its true minimum (under the
        # max objective the non-binding gammas are otherwise free slack that
        # would let a station overstaff for no reason), then hire early.
        targets = [({built.gamma_index[j]: 1.0}, "min")
                   for j in range(msi.n_stations)]
        for t in range(1, msi.horizon + 1):
            for j in range(msi.n_stations):
                day_vars = [built.x_index[(i, j, t)]
                            for i in range(msi.n_pools)
                            if (i, j, t) in built.x_index]
                if day_vars:
                    targets.append(({v: 1.0 for v in day_vars}, "max"))
                    if len(day_vars) > 1:
                        targets.extend(({v: 1.0}, "max") for v in day_vars)
        return refine_lexicographic(built.model, sol, targets) if targets else sol
    if isinstance(built, ReleaseLp):
        n = built.ri.base.n_pools
        lo, hi = built.ranges[0]
        targets = []
        for t in range(lo + 1, hi + 1):
            key = ((), t)                     # high chain of the first epoch
            day_vars = [built.x_index[(i, t, key)] for i in range(n)
                        if (i, t, key) in built.x_index]
            if day_vars:
                targets.append(({v: 1.0 for v in day_vars}, "max"))
                if len(day_vars) > 1:
                    targets.extend(({v: 1.0}, "max") for v in day_vars)
        for k in range(lo, hi + 1):
            y_vars = [built.y_index[(i, 0, (k,))] for i in range(n)
                      if (i, 0, (k,)) in built.y_index]
            if y_vars:
                targets.append(({v: 1.0 for v in y_vars}, "min"))
                if len(y_vars) > 1:
                    targets.extend(({v: 1.0}, "min") for v in y_vars)
        return refine_lexicographic(built.model, sol, targets) if targets else sol
    raise TypeError(f"unknown program wrapper {type(built).__name__}")


def extract_canonical(built, sol: LpSolution):
    """Canonical staffing profile(s) encoded by an optimal solution.

    Base / resolving / joint: the (n, T) hire block (zeros for closed days;
    resolving blocks cover the remaining days only).  Multi-station: an
    (n, m, T) block.  Release: (hires for the first epoch's days, canonical
    release vectors per switch day of the first epoch's closed range).
    """
    if isinstance(built, SingleSwitchLp):
        inst = built.inst
        x = np.zeros((inst.n_pools, inst.horizon))
        for (i, t), v in built.x_index.items():
            x[i, t - 1] = sol.x[v]
        return x
    if isinstance(built, JointLp):
        inst = built.ri.base
        x = np.zeros((inst.n_pools, inst.horizon))
        for (i, t), v in built.x_index.items():
            x[i, t - 1] = sol.x[v]
        return x
    if isinstance(built, MultiStationLp):
        msi = built.msi
        x = np.zeros((msi.n_pools, msi.n_stations, msi.horizon))
        for (i, j, t), v in built.x_index.items():
            x[i, j, t - 1] = sol.x[v]
        return x
    if isinstance(built, ReleaseLp):
        n = built.ri.base.n_pools
        lo, hi = built.ranges[0]
        hires = np.zeros((n, hi - lo))
        for t in range(lo + 1, hi + 1):
            key = ((), min(hi, t))
            for i in range(n):
                v = built.x_index.get((i, t, key))
                if v is not None:
                    hires[i, t - lo - 1] = sol.x[v]
        releases = {}
        for k in range(lo, hi + 1):
            y = np.zeros(n)
            for i in range(n):
                v = built.y_index.get((i, 0, (k,)))
                if v is not None:
                    y[i] = sol.x[v]
            releases[k] = y
        return hires, releases
    raise TypeError(f"unknown program wrapper {type(built).__name__}")


def minimax_value_and_profile(inst: Instance, refine: bool = True):
    """Solve the base program: (gamma_star, canonical (n, T) hire profile)."""
    built = build_lp_single_switch(inst)
    sol = solve_canonical(built, refine=refine)
    return sol.objective, extract_canonical(built, sol)
