import numpy as np
import pytest

from conftest import fig3_instance, random_multi_pool
from staffing_minimax.lp import solve_lp
from staffing_minimax.model import (MultiStationInstance, ReleaseInstance,
                                    StationSpec, fresh_state, make_instance)
from staffing_minimax.programs import (
    ConfigurationExplosion, build_lp_joint_cost, build_lp_multi_station,
    build_lp_release, build_lp_resolving, build_lp_single_switch,
    extract_canonical, minimax_value_and_profile, single_switch_floor,
    solve_canonical)


def test_warmup_lp_demand_pinned():
    # T=1, ample supply, zero last-day error: demand is pinned, cost 0.
    inst = make_instance([10.0], [[1.0]], (0, 1), [0.0])
    built = build_lp_single_switch(inst)
    sol = solve_canonical(built)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    x = extract_canonical(built, sol)
    assert x[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_constraint_count_n_plus_t_plus_1():
    inst = make_instance([1.0], [[1.0]], (0, 1), [0.0])
    assert build_lp_single_switch(inst).model.n_rows == 1 + 1 + 1
    rng = np.random.default_rng(0)
    for _ in range(20):
        inst = random_multi_pool(rng)
        n, T = inst.availability.shape
        assert build_lp_single_switch(inst).model.n_rows == n + T + 1


def test_switch_floor_hand_value():
    # R0=1, L0=0, Delta=(0.5, 0.2), eps=(0.1, 0.05):
    # max(1-1-0, 1-0.5-0.2, 1-0.2-0.1) = 0.7
    inst = make_instance([1.0], [[1.0, 1.0]], (0, 1), [0.5, 0.2],
                         inconsistency=[0.1, 0.05])
    assert single_switch_floor(inst, 2) == pytest.approx(0.7)
    assert single_switch_floor(inst, 1) == pytest.approx(0.3)
    assert single_switch_floor(inst, 0) == pytest.approx(0.0)


def test_fig3_objectives():
    values = {"a": 0.0, "b": 0.476, "c": 0.338}
    for which, expect in values.items():
        sol = solve_lp(build_lp_single_switch(fig3_instance(which)).model)
        assert sol.objective == pytest.approx(expect, abs=5e-3)


def test_resolving_fresh_state_equals_base():
    rng = np.random.default_rng(2)
    for _ in range(20):
        inst = random_multi_pool(rng)
        base = build_lp_single_switch(inst)
        res = build_lp_resolving(inst, fresh_state(inst), 1)
        assert base.model.var_names == res.model.var_names
        assert base.model.objective == res.model.objective
        assert base.model.rows == res.model.rows


def test_resolving_state_shifts_rows():
    inst = make_instance([1.0], [[1.0, 1.0]], (0, 1), [0.5, 0.2])
    st = fresh_state(inst)
    # Hire 0.5 on day 1 at rho=1: s-bar = 0.5, z-bar = 0.5.
    st2 = type(st)(index=2, cum_hires=np.array([0.5]),
                   remaining_supply=np.array([0.5]),
                   remaining_budget=None, interval=(0.5, 1.0),
                   availability=inst.availability.copy())
    built = build_lp_resolving(inst, st2, 2)
    # Supply row rhs is the remaining 0.5.
    coeffs, rel, rhs = built.model.rows[0]
    assert rel == "<=" and rhs == pytest.approx(0.5)
    # Cap row: x_2 <= floor + gamma/C - z_total.
    coeffs, rel, rhs = built.model.rows[1]
    floor = max(0.5, 1.0 - 0.2)
    assert rhs == pytest.approx(floor - 0.5)


def test_multi_station_m1_matches_single():
    rng = np.random.default_rng(3)
    for _ in range(10):
        inst = random_multi_pool(rng)
        if np.any(inst.inconsistency != 0):
            continue
        st = StationSpec(inst.initial_range, inst.error_bounds,
                         inst.under_cost, inst.over_cost)
        for objective in ("max", "sum"):
            msi = MultiStationInstance(inst.pool_sizes, inst.availability,
                                       (st,), objective)
            g_multi = solve_lp(build_lp_multi_station(msi).model).objective
            g_single = solve_lp(build_lp_single_switch(inst).model).objective
            assert g_multi == pytest.approx(g_single, abs=1e-8)


def test_multi_station_epigraph_and_sum_split():
    rho = np.array([[1.0, 0.6], [0.9, 0.5]])
    st = StationSpec((0, 1), np.array([0.6, 0.2]))
    msi_max = MultiStationInstance(np.array([0.8, 0.5]), rho, (st, st), "max")
    built = build_lp_multi_station(msi_max)
    assert built.epigraph is not None
    assert "psi" in built.model.var_names
    # Symmetric utilitarian objective on doubled pools equals twice the
    # single-station objective (brute-force via the solver).
    single = MultiStationInstance(np.array([0.8, 0.5]), rho, (st,), "sum")
    doubled = MultiStationInstance(np.array([1.6, 1.0]), rho, (st, st), "sum")
    g1 = solve_lp(build_lp_multi_station(single).model).objective
    g2 = solve_lp(build_lp_multi_station(doubled).model).objective
    assert g2 == pytest.approx(2 * g1, abs=1e-8)


def test_joint_reductions_and_grid_oracle():
    inst = fig3_instance("b")
    free = ReleaseInstance(base=inst)
    g_joint = solve_lp(build_lp_joint_cost(free).model).objective
    g_base = solve_lp(build_lp_single_switch(inst).model).objective
    assert g_joint == pytest.approx(g_base, abs=1e-8)

    # c = 0 with huge wages: understaffing free, hire nothing.
    cheap = make_instance([10.0], [[1.0, 0.9]], (0, 1), [0.5, 0.2],
                          under_cost=0.0, over_cost=1.0)
    pricey = ReleaseInstance(base=cheap, wages=np.full((1, 2), 100.0))
    sol = solve_lp(build_lp_joint_cost(pricey).model)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)

    # T=1 desk case against a grid enumeration of the exact piecewise cost.
    instT1 = make_instance([10.0], [[1.0]], (0, 1), [0.0])
    ri = ReleaseInstance(base=instT1, wages=np.array([[0.1]]))
    built = build_lp_joint_cost(ri)
    sol = solve_canonical(built)

    def exact_joint_worst(x):
        # max(c*(R0-x) + p*x, C*(x - floor_k)+ + p*x_k terms) for T=1
        under = 1.0 * max(0.0, 1.0 - x) + 0.1 * x
        over = 1.0 * max(0.0, x - 1.0) + 0.1 * x
        return max(under, over)

    grid = np.linspace(0, 2, 2001)
    best = min(exact_joint_worst(x) for x in grid)
    assert sol.objective == pytest.approx(best, abs=1e-6)
    assert sol.objective == pytest.approx(0.1, abs=1e-9)
    assert extract_canonical(built, sol)[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_release_reduces_to_base_when_trivial():
    inst = fig3_instance("b")
    ri = ReleaseInstance(base=inst)    # L=1, fee None, no budget, no wages
    built = build_lp_release(ri)
    g = solve_lp(built.model).objective
    g_base = solve_lp(build_lp_single_switch(inst).model).objective
    assert g == pytest.approx(g_base, abs=1e-7)
    assert not built.y_index           # no release variables exist
    hires, releases = extract_canonical(built, solve_canonical(built))
    assert all(np.all(y == 0) for y in releases.values())


def test_release_configuration_count_and_prefix_sharing():
    inst = make_instance([1.0], [[1.0, 0.8]], (0, 1), [0.5, 0.25])
    ri = ReleaseInstance(base=inst, epoch_breaks=(1, 2),
                         release_fees=(0.1, 0.1), budget=10.0)
    built = build_lp_release(ri)
    assert len(built.configs) == 2 * 2
    # Configurations (1, 1) and (1, 2) share the day-1 hire variables.
    k11 = built.x_key(1, (1, 1))
    k12 = built.x_key(1, (1, 2))
    assert k11 == k12
    # ... and differ once epoch 1 switched at 0 vs 1.
    assert built.x_key(1, (0, 1)) != built.x_key(1, (1, 1))


def test_release_configuration_cap():
    T = 12
    inst = make_instance([1.0], [np.linspace(1, 0.5, T)], (0, 1),
                         np.linspace(0.9, 0.1, T))
    ri = ReleaseInstance(base=inst, epoch_breaks=tuple(range(1, T + 1)),
                         release_fees=(0.1,) * T, budget=10.0)
    with pytest.raises(ConfigurationExplosion):
        build_lp_release(ri, config_cap=100)


def test_release_free_hedging_cannot_hurt():
    # q = 0 everywhere with unlimited budget: objective <= base gamma*.
    T = 3
    inst = make_instance([0.8], [[1.0, 0.7, 0.45]], (0, 1), [0.7, 0.4, 0.15])
    ri = ReleaseInstance(base=inst, epoch_breaks=(1, 2, 3),
                         release_fees=(0.0, 0.0, 0.0))
    g_rel = solve_lp(build_lp_release(ri).model).objective
    g_base = solve_lp(build_lp_single_switch(inst).model).objective
    assert g_rel <= g_base + 1e-8


def test_canonical_profile_unique_and_feasible():
    from staffing_minimax.model import StaffingPlan, check_feasibility
    rng = np.random.default_rng(4)
    for _ in range(25):
        inst = random_multi_pool(rng)
        gamma, x = minimax_value_and_profile(inst)
        gamma2, x2 = minimax_value_and_profile(inst)
        assert gamma == gamma2 and np.array_equal(x, x2)
        ok, viol = check_feasibility(inst, StaffingPlan.of(x))
        assert ok, viol
