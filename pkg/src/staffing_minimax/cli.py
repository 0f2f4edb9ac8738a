"""Command-line entry points.

Subcommands: solve, run, bench, sweep-eta, oracle, calibrate.
Exit codes: 0 ok, 2 input error, 3 solver failure.  Every command is
deterministic under a fixed seed and writes machine-readable output next to
the human summary.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional

import numpy as np

from . import bayesian
from .adversary import (BudgetExceeded, brute_force_worst_case,
                        configuration_sequence, random_nested_sequence,
                        sequence_from_csv, single_switch_sequence,
                        worst_case_sequence, worst_demand_cost)
from .emulator import EmulatorTrace
from .lp import LpError
from .model import (Instance, InstanceError, MultiStationInstance,
                    ReleaseInstance, SequenceError, load_instance,
                    make_instance, validate_instance, validate_multi_station,
                    validate_release_instance)
from .policies import (GreedyTargetPolicy, JointCostPolicy, LpEmulatorPolicy,
                       LpResolvingPolicy, ReleasePolicy, DayObservation)
from .programs import (ConfigurationExplosion, build_lp_joint_cost,
                       build_lp_multi_station, build_lp_release,
                       build_lp_single_switch, extract_canonical,
                       solve_canonical)

INPUT_ERROR, SOLVER_ERROR = 2, 3


class CliInputError(Exception):
    pass


def _load(path):
    try:
        problem = load_instance(path)
    except (OSError, json.JSONDecodeError, KeyError, InstanceError) as exc:
        raise CliInputError(f"cannot read instance {path}: {exc}") from exc
    if isinstance(problem, MultiStationInstance):
        return validate_multi_station(problem)
    if isinstance(problem, ReleaseInstance):
        validate_instance(problem.base)
        return problem
    return validate_instance(problem)


def _infer_program(problem) -> str:
    if isinstance(problem, MultiStationInstance):
        return "multi_station"
    if isinstance(problem, ReleaseInstance):
        if all(q is None for q in problem.release_fees) \
                and problem.budget is None:
            return "joint"
        return "release"
    return "single_switch"


def cmd_solve(args) -> int:
    problem = _load(args.instance)
    program = args.program or _infer_program(problem)
    if program == "single_switch":
        if not isinstance(problem, Instance):
            raise CliInputError("single_switch needs a base instance file")
        built = build_lp_single_switch(problem)
        sol = solve_canonical(built)
        payload = {"program": program, "objective": sol.objective,
                   "hires": extract_canonical(built, sol).tolist()}
    elif program == "multi_station":
        if not isinstance(problem, MultiStationInstance):
            raise CliInputError("multi_station needs a stations file")
        built = build_lp_multi_station(problem)
        sol = solve_canonical(built)
        payload = {"program": program, "objective": sol.objective,
                   "objective_kind": problem.objective,
                   "gamma": [float(sol.x[v]) for v in built.gamma_index],
                   "hires": extract_canonical(built, sol).tolist()}
    elif program == "joint":
        if not isinstance(problem, ReleaseInstance):
            raise CliInputError("joint needs a wages file")
        built = build_lp_joint_cost(problem)
        sol = solve_canonical(built)
        payload = {"program": program, "objective": sol.objective,
                   "hires": extract_canonical(built, sol).tolist()}
    elif program == "release":
        if not isinstance(problem, ReleaseInstance):
            raise CliInputError("release needs a release instance file")
        built = build_lp_release(problem, config_cap=args.config_cap)
        sol = solve_canonical(built)
        hires, releases = extract_canonical(built, sol)
        payload = {"program": program, "objective": sol.objective,
                   "epoch_hires": hires.tolist(),
                   "epoch_releases": {str(k): y.tolist()
                                      for k, y in releases.items()}}
    else:
        raise CliInputError(f"unknown program {program!r}")
    print(f"{payload['objective']:.6f}")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(payload, f, indent=1)
            f.write("\n")
        print(f"canonical profile written to {args.out}")
    return 0


def _build_sequence(spec: str, problem, inst: Instance):
    try:
        if spec == "worst_case":
            return worst_case_sequence(inst)
        if spec.startswith("single_switch:"):
            return single_switch_sequence(inst, int(spec.split(":", 1)[1]))
        if spec.startswith("configuration:"):
            if not isinstance(problem, ReleaseInstance):
                raise CliInputError("configuration sequences need a release "
                                    "instance")
            config = tuple(int(x) for x in spec.split(":", 1)[1].split(","))
            return configuration_sequence(problem, config)
        if spec.startswith("random:"):
            return random_nested_sequence(inst, int(spec.split(":", 1)[1]))
        if spec.startswith("file:"):
            return sequence_from_csv(spec.split(":", 1)[1], inst)
    except (ValueError, SequenceError, InstanceError) as exc:
        raise CliInputError(f"bad sequence spec {spec!r}: {exc}") from exc
    raise CliInputError(f"unknown sequence spec {spec!r}")


def _build_policy(name: str, problem, inst: Instance, gamma: Optional[float]):
    if name == "lp_emulator":
        return LpEmulatorPolicy(inst)
    if name == "lp_resolving":
        return LpResolvingPolicy(inst)
    if name == "naive_greedy":
        return bayesian.NaiveGreedyPolicy(inst)
    if name == "greedy_target":
        if gamma is None:
            from .policies import gamma_star_single_pool
            gamma = gamma_star_single_pool(inst).gamma_star
        return GreedyTargetPolicy(inst, gamma)
    if name == "release":
        if not isinstance(problem, ReleaseInstance):
            raise CliInputError("release policy needs a release instance")
        return ReleasePolicy(validate_release_instance(problem))
    if name == "joint":
        if not isinstance(problem, ReleaseInstance):
            raise CliInputError("joint policy needs a wages instance")
        return JointCostPolicy(problem)
    raise CliInputError(f"unknown policy {name!r}")


def cmd_run(args) -> int:
    problem = _load(args.instance)
    inst = problem.base if isinstance(problem, ReleaseInstance) else problem
    if not isinstance(inst, Instance):
        raise CliInputError("run drives single-demand instances")
    sequence = _build_sequence(args.sequence, problem, inst)
    policy = _build_policy(args.policy, problem, inst, args.gamma)

    n, T = inst.availability.shape
    hires = np.zeros((n, T))
    releases = np.zeros((n, T))
    canonical = getattr(policy, "canonical", None)
    trace = EmulatorTrace()
    for t in range(1, T + 1):
        decision = policy.step(
            DayObservation(day=t, interval=sequence.interval(t)))
        hires[:, t - 1] = decision.hires
        releases[:, t - 1] = decision.releases
        canon_cum = (canonical[:, :t].sum() if canonical is not None
                     else hires.sum() - releases.sum())
        trace.record(t, canon_cum, hires.sum() - releases.sum(),
                     sequence.effective_hi[t - 1],
                     sequence.effective_lo[t - 1], decision.hires,
                     decision.releases)
    total = float(hires.sum() - releases.sum())
    if args.demand is not None:
        d = args.demand
        cost = (inst.under_cost * max(0.0, d - total)
                + inst.over_cost * max(0.0, total - d))
    else:
        cost, d = worst_demand_cost(inst, total, sequence)
    if args.out:
        trace.write_csv(args.out)
        print(f"trace written to {args.out}")
    print(f"total_staffed = {total:.6f}")
    print(f"cost = {cost:.6f} against demand {d:.6f}")
    if isinstance(problem, ReleaseInstance) and np.any(problem.wages != 0):
        wage_bill = float((problem.wages * hires).sum())
        print(f"wage_bill = {wage_bill:.6f}")
        print(f"joint_cost = {cost + wage_bill:.6f}")
    return 0


def _policy_factories(names, inst, process, mdp_cfg):
    factories = {}
    for name in names:
        if name == "lp_emulator":
            factories[name] = lambda inst=inst: LpEmulatorPolicy(inst)
        elif name == "lp_resolving":
            factories[name] = lambda inst=inst: LpResolvingPolicy(inst)
        elif name == "naive_greedy":
            factories[name] = lambda inst=inst: bayesian.NaiveGreedyPolicy(inst)
        elif name == "naive_bayesian":
            factories[name] = lambda inst=inst: bayesian.NaiveBayesianPolicy(
                inst)
        elif name in ("empirical_mdp", "full_info_mdp"):
            spec = bayesian.MdpSpec(
                grid_levels=int(mdp_cfg.get("grid_levels", 11)),
                transition="true" if name == "full_info_mdp" else "empirical",
                state_cap=int(mdp_cfg.get("state_cap", 2_000_000)))
            factories[name] = (lambda inst=inst, process=process, spec=spec:
                               bayesian.MdpPolicy(inst, process, spec))
        else:
            raise CliInputError(f"unknown bench policy {name!r}")
    return factories


def _bench_rows(config: dict, reps: int, rep_offset: int = 0):
    T = int(config["horizon"])
    process = bayesian.DemandProcess(T, float(config.get("prior_hi", 0.5)))
    table = bayesian.CalibrationTable.from_dict(config["calibration"])
    inst = bayesian.forecast_instance(
        config["pool_sizes"], config["availability"], table,
        float(config.get("under_cost", 1.0)),
        float(config.get("over_cost", 1.0)), process)
    factories = _policy_factories(config["policies"], inst, process,
                                  config.get("mdp", {}))
    rows = bayesian.run_bayesian_world(
        inst, process, table, factories, reps, int(config["seed"]),
        rep_offset=rep_offset)
    return rows


def cmd_bench(args) -> int:
    try:
        with open(args.config) as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliInputError(f"cannot read config {args.config}: {exc}") from exc
    if args.seed is not None:
        config["seed"] = args.seed
    if "calibration" not in config:
        process = bayesian.DemandProcess(int(config["horizon"]),
                                         float(config.get("prior_hi", 0.5)))
        config["calibration"] = bayesian.calibrate_intervals(
            process, draws=20_000, seed=int(config["seed"])).to_dict()
    reps = args.reps or int(config.get("replications", 100))
    if reps < 1:
        raise CliInputError("need at least one replication")

    if args.workers > 1:
        import multiprocessing as mp
        chunks = np.array_split(np.arange(reps), args.workers)
        with mp.get_context("fork").Pool(args.workers) as pool:
            parts = pool.starmap(_bench_rows, [
                (config, len(chunk), int(chunk[0]))
                for chunk in chunks if len(chunk)])
        rows = [row for part in parts for row in part]
    else:
        rows = _bench_rows(config, reps)

    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=["replication", "policy", "cost",
                                              "runtime_ms", "seed"])
            w.writeheader()
            for row in rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v
                            for k, v in row.items()})
        print(f"results written to {args.out}")
    summary = bayesian.summarize(rows)
    baseline = config["policies"][0]
    print(f"{'policy':16s} {'mean_cost':>10s} {'stderr':>8s} "
          f"{'runtime_ms':>11s} {'vs_' + baseline:>12s} {'diff_se':>8s}")
    for name in config["policies"]:
        s = summary[name]
        if name == baseline:
            diff, dse = 0.0, 0.0
        else:
            diff, dse = bayesian.paired_differences(rows, name, baseline)
        print(f"{name:16s} {s['mean_cost']:10.6f} {s['stderr']:8.4f} "
              f"{s['runtime_ms']:11.1f} {diff:+12.6f} {dse:8.4f}")
    return 0


def companion_sweep_instance(T: int, size: float, eta: float,
                             under_cost: float, over_cost: float) -> Instance:
    """Two-pool construction used for the convergence-rate sweep: fixed
    workers available through day T-10, ready workers on an s-shaped curve,
    error bounds 1/sqrt(t*eta) - 1/sqrt((T+1)*eta), demand range [0, 1]."""
    cutoff = max(1, T - 10)
    midpoint = T - 5
    rho1 = [1.0 if t <= cutoff else 0.0 for t in range(1, T + 1)]
    rho2 = [1.0 / (1.0 + np.exp(t - midpoint)) for t in range(1, T + 1)]
    deltas = [1.0 / np.sqrt(t * eta) - 1.0 / np.sqrt((T + 1) * eta)
              for t in range(1, T + 1)]
    return make_instance([size, size], [rho1, rho2], (0.0, 1.0), deltas,
                         under_cost=under_cost, over_cost=over_cost)


def cmd_sweep_eta(args) -> int:
    etas = [float(x) for x in args.etas.split(",")]
    if any(e <= 0 for e in etas):
        raise CliInputError("eta values must be positive")
    results = []
    for eta in sorted(etas):
        inst = companion_sweep_instance(args.T, args.s, eta, args.c, args.C)
        built = build_lp_single_switch(inst)
        from .lp import solve_lp
        results.append((eta, solve_lp(built.model).objective))
    print(f"{'eta':>8s} {'gamma_star':>12s}")
    for eta, g in results:
        print(f"{eta:8.4f} {g:12.6f}")
    monotone = all(results[i + 1][1] <= results[i][1] + 1e-9
                   for i in range(len(results) - 1))
    print(f"nonincreasing: {'yes' if monotone else 'NO'}")
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["eta", "gamma_star"])
            for eta, g in results:
                w.writerow([repr(eta), repr(g)])
        print(f"sweep written to {args.out}")
    return 0 if monotone else SOLVER_ERROR


def cmd_oracle(args) -> int:
    problem = _load(args.instance)
    inst = problem.base if isinstance(problem, ReleaseInstance) else problem
    if not isinstance(inst, Instance):
        raise CliInputError("oracle drives single-demand instances")
    built = build_lp_single_switch(inst)
    from .lp import solve_lp
    gamma = solve_lp(built.model).objective
    policy_factory = lambda: _build_policy(args.policy, problem, inst,
                                           args.gamma)
    witness = brute_force_worst_case(inst, policy_factory, args.grid_step,
                                     cap=args.cap)
    print(f"max_cost = {witness.cost:.6f}")
    print(f"gamma_star = {gamma:.6f}")
    print(f"witness demand = {witness.demand:.6f}")
    print("witness sequence:")
    for t, iv in enumerate(witness.sequence.intervals, start=1):
        print(f"  day {t}: [{iv.lo:.4f}, {iv.hi:.4f}]")
    return 0


def cmd_calibrate(args) -> int:
    process = bayesian.DemandProcess(args.T, args.prior_hi)
    table = bayesian.calibrate_intervals(process, coverage=args.coverage,
                                         draws=args.draws, seed=args.seed)
    cov = bayesian.empirical_coverage(process, table, draws=args.draws,
                                      seed=args.seed + 1)
    print(f"{'day':>4s} {'l_t':>9s} {'r_t':>9s} {'coverage':>9s}")
    for t in range(args.T):
        print(f"{t + 1:4d} {table.lower[t]:9.4f} {table.upper[t]:9.4f} "
              f"{cov[t]:9.4f}")
    print(f"day-0 range around prior mean {table.prior_mean:.3f}: "
          f"[-{table.lower0:.3f}, +{table.upper0:.3f}]")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(table.to_dict(), f, indent=1)
            f.write("\n")
        print(f"calibration table written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="staffing-minimax",
        description="Minimax-optimal online staffing under interval "
                    "demand forecasts")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a staffing program")
    ps.add_argument("--instance", required=True)
    ps.add_argument("--program", choices=["single_switch", "multi_station",
                                          "release", "joint"])
    ps.add_argument("--out", help="canonical profile JSON")
    ps.add_argument("--config-cap", type=int, default=100_000)
    ps.set_defaults(func=cmd_solve)

    pr = sub.add_parser("run", help="drive a policy against a sequence")
    pr.add_argument("--instance", required=True)
    pr.add_argument("--policy", required=True)
    pr.add_argument("--sequence", required=True,
                    help="worst_case | single_switch:K | configuration:J1,J2 "
                         "| random:SEED | file:PATH")
    pr.add_argument("--demand", type=float)
    pr.add_argument("--gamma", type=float)
    pr.add_argument("--out", help="trace CSV")
    pr.set_defaults(func=cmd_run)

    pb = sub.add_parser("bench", help="run the Bayesian benchmark world")
    pb.add_argument("--config", required=True)
    pb.add_argument("--reps", type=int)
    pb.add_argument("--seed", type=int, help="override the config seed")
    pb.add_argument("--out", help="results CSV")
    pb.add_argument("--workers", type=int, default=1)
    pb.set_defaults(func=cmd_bench)

    pe = sub.add_parser("sweep-eta", help="optimal cost vs forecast "
                                          "convergence rate")
    pe.add_argument("--T", type=int, default=14)
    pe.add_argument("--s", type=float, default=1.0)
    pe.add_argument("--c", type=float, default=1.0)
    pe.add_argument("--C", type=float, default=1.0)
    pe.add_argument("--etas", default="0.25,0.5,1,2,4")
    pe.add_argument("--out", help="sweep CSV")
    pe.set_defaults(func=cmd_sweep_eta)

    po = sub.add_parser("oracle", help="brute-force worst case on a grid")
    po.add_argument("--instance", required=True)
    po.add_argument("--policy", default="lp_emulator")
    po.add_argument("--grid-step", type=float, default=0.25)
    po.add_argument("--gamma", type=float)
    po.add_argument("--cap", type=int, default=2_000_000)
    po.set_defaults(func=cmd_oracle)

    pc = sub.add_parser("calibrate", help="calibrate forecast offsets")
    pc.add_argument("--T", type=int, required=True)
    pc.add_argument("--prior-hi", type=float, default=0.5)
    pc.add_argument("--coverage", type=float, default=0.95)
    pc.add_argument("--draws", type=int, default=20_000)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--out", help="calibration JSON")
    pc.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (CliInputError, InstanceError, SequenceError,
            bayesian.InsufficientDraws) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (LpError, ConfigurationExplosion, BudgetExceeded,
            bayesian.StateExplosion) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return SOLVER_ERROR


if __name__ == "__main__":
    sys.exit(main())
