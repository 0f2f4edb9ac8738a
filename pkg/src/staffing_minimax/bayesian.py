"""Bayesian benchmark world: demand process, calibrated intervals, heuristic
policies, and discretized MDP baselines.

Total demand accumulates from per-day partial demands, each Binomial(5, xi_t)
with a uniform random prior xi_t.  Each day the platform also receives one
sampled trajectory of the remaining partials, sharing the hidden priors.
Point estimates plus empirically calibrated offsets turn these into interval
forecasts for the minimax policies; the heuristics and MDPs consume the
samples directly.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import Instance, PredictionInterval, make_instance, staffing_cost
from .policies import DayObservation, Decision

BINOM_TRIALS = 5


class InsufficientDraws(ValueError):
    pass


class StateExplosion(RuntimeError):
    pass


@dataclass(frozen=True)
class DemandProcess:
    """Per-day priors xi_t ~ U(0, prior_hi); partials Binomial(5, xi_t)."""

    horizon: int
    prior_hi: float = 0.5

    @property
    def max_demand(self) -> float:
        return float(BINOM_TRIALS * self.horizon)

    def marginal_pmf(self) -> np.ndarray:
        """Exact per-day marginal of a partial demand (same for every day).

        P(j) = (1/p) * C(5,j) * int_0^p xi^j (1-xi)^(5-j) dxi, expanded as a
        polynomial so no special functions are needed.
        """
        p = self.prior_hi
        pmf = np.zeros(BINOM_TRIALS + 1)
        for j in range(BINOM_TRIALS + 1):
            total = 0.0
            for mth in range(BINOM_TRIALS - j + 1):
                total += (math.comb(BINOM_TRIALS - j, mth) * (-1.0) ** mth
                          * p ** (j + mth) / (j + mth + 1))
            pmf[j] = math.comb(BINOM_TRIALS, j) * total
        return pmf / pmf.sum()

    def sample_world(self, rng: np.random.Generator) -> "World":
        T = self.horizon
        priors = rng.uniform(0.0, self.prior_hi, size=T)
        partials = rng.binomial(BINOM_TRIALS, priors).astype(float)
        profiles = [rng.binomial(BINOM_TRIALS, priors[t:]).astype(float)
                    for t in range(1, T + 1)]
        return World(priors, partials, profiles)


@dataclass(frozen=True)
class World:
    """One realization: hidden priors, realized partials, and the sampled
    future-partial profile revealed on each day (profiles[t-1][j] samples
    day t+1+j)."""

    priors: np.ndarray
    partials: np.ndarray
    profiles: List[np.ndarray]

    @property
    def demand(self) -> float:
        return float(self.partials.sum())


def point_estimator(partials_so_far: Sequence[float],
                    profiles_so_far: Sequence[np.ndarray]) -> float:
    """Realized total plus the average sampled future total.

    Day-tau profiles cover days tau+1..T; only their entries beyond the
    current day contribute.
    """
    t = len(partials_so_far)
    if t < 1:
        raise ValueError("need at least one observed day")
    realized = float(np.sum(partials_so_far))
    future = 0.0
    for tau, prof in enumerate(profiles_so_far, start=1):
        future += float(np.sum(prof[t - tau:]))
    return realized + future / t


@dataclass(frozen=True)
class CalibrationTable:
    """Per-day interval offsets (l_t, r_t) hitting the target coverage.

    Also carries the day-0 interval (offsets around the prior demand mean,
    calibrated the same way) that the minimax policies use as their initial
    demand range.
    """

    lower: np.ndarray
    upper: np.ndarray
    coverage: float = 0.95
    prior_mean: float = 0.0
    lower0: float = 0.0
    upper0: float = 0.0

    def width(self) -> np.ndarray:
        return self.lower + self.upper

    def initial_range(self, cap: float) -> Tuple[float, float]:
        lo = min(max(self.prior_mean - self.lower0, 0.0), cap)
        hi = min(max(self.prior_mean + self.upper0, 0.0), cap)
        return lo, max(lo, hi)

    def to_dict(self) -> dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist(),
                "coverage": self.coverage, "prior_mean": self.prior_mean,
                "lower0": self.lower0, "upper0": self.upper0}

    @staticmethod
    def from_dict(d: dict) -> "CalibrationTable":
        return CalibrationTable(np.asarray(d["lower"], float),
                                np.asarray(d["upper"], float),
                                float(d.get("coverage", 0.95)),
                                float(d.get("prior_mean", 0.0)),
                                float(d.get("lower0", 0.0)),
                                float(d.get("upper0", 0.0)))


def _residual_draws(process: DemandProcess, t: int, draws: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Residual (future actual - averaged sampled future) at day t.

    Summing the t sampled trajectories day by day is a Binomial(5t, xi_k)
    draw, which keeps calibration exact and fast.
    """
    T = process.horizon
    if t >= T:
        return np.zeros(draws)
    xi = rng.uniform(0.0, process.prior_hi, size=(draws, T - t))
    actual = rng.binomial(BINOM_TRIALS, xi).sum(axis=1)
    pooled = rng.binomial(BINOM_TRIALS * t, xi).sum(axis=1) / t
    return actual - pooled


def calibrate_intervals(process: DemandProcess, coverage: float = 0.95,
                        draws: int = 20_000, seed: int = 0
                        ) -> CalibrationTable:
    """Empirical tail quantiles of the per-day point-estimate residuals."""
    if draws < 10_000:
        raise InsufficientDraws("calibration needs at least 10^4 draws")
    T = process.horizon
    lo_q, hi_q = (1.0 - coverage) / 2.0, 1.0 - (1.0 - coverage) / 2.0
    lower = np.zeros(T)
    upper = np.zeros(T)
    for t in range(1, T):
        rng = np.random.default_rng([seed, t])
        resid = _residual_draws(process, t, draws, rng)
        lower[t - 1] = max(0.0, -float(np.quantile(resid, lo_q)))
        upper[t - 1] = max(0.0, float(np.quantile(resid, hi_q)))
    # Day-0 interval: quantiles of the demand around its prior mean.
    rng = np.random.default_rng([seed, 0])
    xi = rng.uniform(0.0, process.prior_hi, size=(draws, T))
    totals = rng.binomial(BINOM_TRIALS, xi).sum(axis=1)
    mean_d = float(totals.mean())
    lower0 = max(0.0, -float(np.quantile(totals - mean_d, lo_q)))
    upper0 = max(0.0, float(np.quantile(totals - mean_d, hi_q)))
    return CalibrationTable(lower, upper, coverage, mean_d, lower0, upper0)


def empirical_coverage(process: DemandProcess, table: CalibrationTable,
                       draws: int = 20_000, seed: int = 1) -> np.ndarray:
    """Held-out per-day coverage of the calibrated intervals."""
    T = process.horizon
    cov = np.ones(T)
    for t in range(1, T):
        rng = np.random.default_rng([seed, 7919 + t])
        resid = _residual_draws(process, t, draws, rng)
        cov[t - 1] = float(np.mean(
            (-table.lower[t - 1] <= resid) & (resid <= table.upper[t - 1])))
    return cov


def forecast_instance(pool_sizes, availability, table: CalibrationTable,
                      under_cost=1.0, over_cost=1.0,
                      process: Optional[DemandProcess] = None) -> Instance:
    """Instance the minimax policies see: the calibrated day-0 interval as
    the initial range, per-day widths from the calibration table, eps = 0."""
    from .model import validate_instance
    T = len(table.lower)
    cap = float(BINOM_TRIALS * T if process is None else process.max_demand)
    lo0, hi0 = table.initial_range(cap)
    return validate_instance(make_instance(
        pool_sizes, availability, (lo0, hi0), table.width(),
        under_cost=under_cost, over_cost=over_cost))


def lower_quantile(samples: Sequence[float], q: float) -> float:
    """Smallest sample whose empirical CDF reaches q (documented convention)."""
    xs = np.sort(np.asarray(samples, float))
    idx = max(1, math.ceil(q * len(xs)))
    return float(xs[idx - 1])


class _GreedyTowardTarget:
    """Shared mechanics: hire as much as possible toward a staffing target."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.usage = np.zeros(inst.n_pools)
        self.total = 0.0
        self.day = 0

    def _hire_toward(self, target: float) -> np.ndarray:
        inst = self.inst
        t = self.day
        rho_t = inst.availability[:, t - 1]
        avail = np.maximum(rho_t * (inst.pool_sizes - self.usage), 0.0)
        need = max(0.0, target - self.total)
        hires = np.zeros(inst.n_pools)
        for i in sorted(range(inst.n_pools), key=lambda i: (rho_t[i], i)):
            if rho_t[i] <= 0:
                continue
            take = min(need, avail[i])
            hires[i] = take
            self.usage[i] += take / rho_t[i]
            need -= take
            if need <= 1e-15:
                break
        self.total += float(hires.sum())
        return hires


class NaiveGreedyPolicy(_GreedyTowardTarget):
    """Hire immediately toward the worst-case-balancing point
    (C L_t + c R_t) / (C + c); never looks ahead."""

    kind = "naive_greedy"

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        inst = self.inst
        target = ((inst.over_cost * obs.interval.lo
                   + inst.under_cost * obs.interval.hi)
                  / (inst.over_cost + inst.under_cost))
        return Decision.hire_only(self._hire_toward(target))


class NaiveBayesianPolicy(_GreedyTowardTarget):
    """Single-shot newsvendor on the empirical total-demand samples."""

    kind = "naive_bayesian"

    def __init__(self, inst: Instance):
        super().__init__(inst)
        self.realized = 0.0
        self.profiles: List[np.ndarray] = []

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        t = self.day
        if obs.partial is None or obs.samples is None:
            raise ValueError("naive bayesian policy needs partial demand and "
                             "sample observations")
        self.realized += float(obs.partial)
        self.profiles.append(np.asarray(obs.samples, float))
        draws = [self.realized + float(np.sum(prof[t - tau:]))
                 for tau, prof in enumerate(self.profiles, start=1)]
        q = self.inst.under_cost / (self.inst.under_cost + self.inst.over_cost)
        return Decision.hire_only(self._hire_toward(lower_quantile(draws, q)))


@dataclass(frozen=True)
class MdpSpec:
    """Discretization and transition source for the MDP baselines.

    State: (day, integer partial-demand sum, per-pool cumulative-hire grid
    index).  Action: per-pool hire increments on the grid.  Supply enters
    through the conservative charge rule (prior hires charged at the
    previous day's rate), which is exact for T <= 2 and for on/off pools.
    """

    grid_levels: int = 21
    transition: str = "empirical"       # "empirical" | "true"
    state_cap: int = 2_000_000
    resolve_each_day: bool = True


def _level_grid(inst: Instance, spec: MdpSpec) -> List[np.ndarray]:
    return [np.linspace(0.0, float(s), spec.grid_levels)
            for s in inst.pool_sizes]


def _allowed_ranges(inst: Instance, levels: List[np.ndarray], t: int
                    ) -> List[np.ndarray]:
    """For each pool, the largest reachable grid index from each index."""
    out = []
    for i, lv in enumerate(levels):
        rho_t = inst.availability[i, t - 1]
        rho_prev = 1.0 if t == 1 else inst.availability[i, t - 2]
        hi_idx = np.zeros(len(lv), dtype=int)
        for g, h in enumerate(lv):
            if rho_t <= 0 or rho_prev <= 0:
                hi_idx[g] = g
                continue
            cap = h + rho_t * max(0.0, float(inst.pool_sizes[i]) - h / rho_prev)
            hi_idx[g] = int(np.searchsorted(lv, cap + 1e-9, side="right") - 1)
            hi_idx[g] = max(hi_idx[g], g)
        out.append(hi_idx)
    return out


def _range_min(W: np.ndarray, hi_idx: np.ndarray, axis: int) -> np.ndarray:
    """out[..., g, ...] = min over g' in [g, hi_idx[g]] of W[..., g', ...]."""
    Wm = np.moveaxis(W, axis, -1)
    out = np.empty_like(Wm)
    G = Wm.shape[-1]
    for g in range(G):
        out[..., g] = Wm[..., g:hi_idx[g] + 1].min(axis=-1)
    return np.moveaxis(out, -1, axis)


def backward_induction(inst: Instance, pmfs: Dict[int, np.ndarray],
                       levels: List[np.ndarray], t_start: int,
                       spec: MdpSpec) -> List[np.ndarray]:
    """Value arrays V[t] for t = t_start..T over (demand sum, grid indices).

    V[t][D, g...] is the optimal expected terminal cost when day t's partial
    sum is D, cumulative hires sit at grid levels g, and day t's hire is
    still to be chosen.  pmfs[t] is day t's partial-demand distribution.
    """
    n, T = inst.availability.shape
    G = spec.grid_levels
    d_max = BINOM_TRIALS * T
    if (d_max + 1) * G ** n > spec.state_cap:
        raise StateExplosion(f"{(d_max + 1) * G ** n} states exceed the cap")
    totals = levels[0].reshape(-1, *([1] * (n - 1)))
    for i in range(1, n):
        shape = [1] * n
        shape[i] = -1
        totals = totals + levels[i].reshape(shape)
    demands = np.arange(d_max + 1, dtype=float)
    cost = (inst.under_cost
            * np.maximum(demands.reshape(-1, *([1] * n)) - totals, 0.0)
            + inst.over_cost
            * np.maximum(totals - demands.reshape(-1, *([1] * n)), 0.0))

    values: Dict[int, np.ndarray] = {}
    for t in range(T, t_start - 1, -1):
        if t == T:
            W = cost
        else:
            pmf = pmfs[t + 1]
            V_next = values[t + 1]
            W = np.zeros_like(V_next)
            for j, pj in enumerate(pmf):
                if pj == 0:
                    continue
                W[:d_max + 1 - j] += pj * V_next[j:]
            # Demand sums that can no longer occur keep the terminal shape;
            # they are never queried from reachable states.
            W[d_max + 1 - len(pmf) + 1:] = V_next[d_max + 1 - len(pmf) + 1:]
        for i, hi_idx in enumerate(_allowed_ranges(inst, levels, t)):
            W = _range_min(W, hi_idx, axis=1 + i)
        values[t] = W
    return [values[t] for t in range(t_start, T + 1)]


class MdpPolicy:
    """Finite-horizon backward induction, re-solved per day by default.

    The empirical variant estimates each future day's partial-demand pmf
    from the sampled trajectories received so far; the true variant uses the
    process marginal.  Played hires are capped at the true availability and
    the internal state snaps to the nearest grid level.
    """

    kind = "empirical_mdp"

    def __init__(self, inst: Instance, process: DemandProcess, spec: MdpSpec,
                 sample_pool: Optional[List[np.ndarray]] = None):
        self.inst = inst
        self.process = process
        self.spec = spec
        self.kind = ("full_info_mdp" if spec.transition == "true"
                     else "empirical_mdp")
        self.levels = _level_grid(inst, spec)
        self.demand_sum = 0.0
        self.grid_idx = np.zeros(inst.n_pools, dtype=int)
        self.cum_hires = np.zeros(inst.n_pools)
        self.usage = np.zeros(inst.n_pools)
        self.day = 0
        self.profiles: List[np.ndarray] = list(sample_pool or [])
        self._plan_values: Dict[int, np.ndarray] = {}

    def _pmfs(self) -> Dict[int, np.ndarray]:
        T = self.inst.horizon
        t = self.day
        if self.spec.transition == "true":
            pmf = self.process.marginal_pmf()
            return {k: pmf for k in range(t + 1, T + 1)}
        out = {}
        for k in range(t + 1, T + 1):
            obs = []
            for tau, prof in enumerate(self.profiles, start=1):
                idx = k - tau - 1
                if 0 <= idx < len(prof):
                    obs.append(prof[idx])
            counts = np.bincount(np.asarray(obs, dtype=int),
                                 minlength=BINOM_TRIALS + 1).astype(float)
            if counts.sum() == 0:
                counts[:] = 1.0        # no information: uniform fallback
            out[k] = counts / counts.sum()
        return out

    def step(self, obs: DayObservation) -> Decision:
        self.day += 1
        t = self.day
        inst = self.inst
        if obs.partial is None:
            raise ValueError("MDP policies need partial-demand observations")
        self.demand_sum += float(obs.partial)
        if obs.samples is not None:
            self.profiles.append(np.asarray(obs.samples, float))
        T = inst.horizon
        if t < T and (self.spec.resolve_each_day
                      or (t + 1) not in self._plan_values):
            tail = backward_induction(inst, self._pmfs(), self.levels, t + 1,
                                      self.spec)
            self._plan_values = {t + 1 + k: v for k, v in enumerate(tail)}
        d_max = BINOM_TRIALS * T
        D = int(round(min(self.demand_sum, d_max)))
        # Today's action range uses the exactly-known remaining availability
        # (the Markov charge rule is only needed for future days inside the
        # backward induction).
        choices = []
        rho_now = inst.availability[:, t - 1]
        for i in range(inst.n_pools):
            cap = self.cum_hires[i]
            if rho_now[i] > 0:
                cap += rho_now[i] * max(0.0, float(inst.pool_sizes[i])
                                        - self.usage[i])
            hi_idx = int(np.searchsorted(self.levels[i], cap + 1e-9,
                                         side="right") - 1)
            hi_idx = max(hi_idx, self.grid_idx[i])
            choices.append(range(self.grid_idx[i], hi_idx + 1))
        best, best_g = None, None
        for combo in itertools.product(*choices):
            if t == T:
                h = sum(self.levels[i][g] for i, g in enumerate(combo))
                val = (inst.under_cost * max(0.0, self.demand_sum - h)
                       + inst.over_cost * max(0.0, h - self.demand_sum))
            else:
                val = float(self._plan_values[t + 1][(D,) + tuple(combo)])
            if best is None or val < best - 1e-12:
                best, best_g = val, combo
        hires = np.zeros(inst.n_pools)
        rho_t = inst.availability[:, t - 1]
        for i, g in enumerate(best_g):
            want = max(0.0, self.levels[i][g] - self.cum_hires[i])
            if rho_t[i] <= 0:
                continue
            avail = max(0.0, rho_t[i] * (float(inst.pool_sizes[i])
                                         - self.usage[i]))
            hires[i] = min(want, avail)
            self.usage[i] += hires[i] / rho_t[i]
        self.cum_hires += hires
        for i in range(inst.n_pools):
            self.grid_idx[i] = int(np.argmin(
                np.abs(self.levels[i] - self.cum_hires[i])))
        return Decision.hire_only(hires)


def mdp_root_value(inst: Instance, pmfs: Dict[int, np.ndarray],
                   spec: MdpSpec) -> float:
    """Expected optimal cost before day 1, mixing over the day-1 partial."""
    levels = _level_grid(inst, spec)
    V = backward_induction(inst, pmfs, levels, 1, spec)[0]
    zero = (0,) * inst.n_pools
    pmf1 = pmfs[1]
    return float(sum(pj * V[(j,) + zero] for j, pj in enumerate(pmf1)))


def run_bayesian_world(inst: Instance, process: DemandProcess,
                       table: CalibrationTable,
                       policies: Dict[str, Callable[[], object]],
                       replications: int, seed: int,
                       rep_offset: int = 0) -> List[dict]:
    """Paired Monte-Carlo evaluation: every policy sees the same worlds.

    Returns one row per (replication, policy): cost, runtime_ms, seed.
    Replication streams are seeded by global index, so splitting the range
    across workers (via rep_offset) reproduces the single-worker results.
    """
    T = process.horizon
    hi_cap = process.max_demand
    rows: List[dict] = []
    for rep in range(rep_offset, rep_offset + replications):
        rng = np.random.default_rng([seed, rep])
        world = process.sample_world(rng)
        intervals = []
        for t in range(1, T + 1):
            est = point_estimator(world.partials[:t], world.profiles[:t])
            lo = min(max(est - table.lower[t - 1], 0.0), hi_cap)
            hi = min(max(est + table.upper[t - 1], 0.0), hi_cap)
            intervals.append(PredictionInterval(min(lo, hi), hi))
        for name, factory in policies.items():
            t0 = time.perf_counter()
            policy = factory()
            hires = np.zeros((inst.n_pools, T))
            for t in range(1, T + 1):
                obs = DayObservation(day=t, interval=intervals[t - 1],
                                     partial=float(world.partials[t - 1]),
                                     samples=world.profiles[t - 1])
                hires[:, t - 1] = policy.step(obs).hires
            elapsed = (time.perf_counter() - t0) * 1e3
            from .model import StaffingPlan
            cost = staffing_cost(inst, StaffingPlan.of(hires), world.demand)
            rows.append({"replication": rep, "policy": name,
                         "cost": cost, "runtime_ms": elapsed, "seed": seed})
    return rows


def summarize(rows: List[dict]) -> Dict[str, dict]:
    """Per-policy mean cost, standard error, and total runtime."""
    out: Dict[str, dict] = {}
    by_policy: Dict[str, List[float]] = {}
    runtime: Dict[str, float] = {}
    for row in rows:
        by_policy.setdefault(row["policy"], []).append(row["cost"])
        runtime[row["policy"]] = runtime.get(row["policy"], 0.0) \
            + row["runtime_ms"]
    for name, costs in by_policy.items():
        arr = np.asarray(costs)
        out[name] = {
            "mean_cost": float(arr.mean()),
            "stderr": float(arr.std(ddof=1) / np.sqrt(len(arr)))
            if len(arr) > 1 else 0.0,
            "runtime_ms": runtime[name],
            "replications": len(arr),
        }
    return out


def paired_differences(rows: List[dict], a: str, b: str) -> Tuple[float, float]:
    """Mean and standard error of cost(a) - cost(b) on shared replications."""
    costs_a = {r["replication"]: r["cost"] for r in rows if r["policy"] == a}
    costs_b = {r["replication"]: r["cost"] for r in rows if r["policy"] == b}
    common = sorted(set(costs_a) & set(costs_b))
    diffs = np.array([costs_a[k] - costs_b[k] for k in common])
    se = float(diffs.std(ddof=1) / np.sqrt(len(diffs))) if len(diffs) > 1 else 0.0
    return float(diffs.mean()), se
