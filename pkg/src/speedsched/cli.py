"""Command-line entry point: ``speedsched <command> ...``.

Exit codes: 0 success, 1 infeasible demand or budget too small, 2 bad input,
3 oracle refusal, 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from fractions import Fraction

from . import io
from .dichotomy import BUDGET_TOO_SMALL, maximize_throughput
from .dp_agreeable import solve_agreeable
from .dp_equal import solve_equal
from .grids import build_phi, build_theta
from .model import (DemandInfeasibleError, InvariantError, SchedulingError,
                    ValidationError, WrongSolverError, as_scalar, energy_of,
                    format_scalar, validate_plan)
from .oracle import (OracleRefusal, opt_nonpreemptive, opt_preemptive,
                     opt_preemptive_throughput)
from .primal_dual import (PdSolution, profiles_from_plan, solve,
                          verify_dual)

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_REFUSED, EXIT_INVARIANT = range(5)

CSV_COLUMNS = ["instance", "solver", "n", "m", "alpha", "demand_or_budget",
               "throughput", "energy", "iterations", "ms"]


class UsageError(SchedulingError):
    pass


def _scalar_arg(text):
    try:
        return as_scalar(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _load(args):
    try:
        with open(args.instance, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.instance}: {exc.strerror}") from exc
    return io.read_instance(text, allow_float=args.float)


def _need(value, fallback, name):
    v = value if value is not None else fallback
    if v is None:
        raise UsageError(f"--{name} is required (or set it in the instance file)")
    return v


def _fmt(x):
    if x is None:
        return ""
    if x == float("inf"):
        return "inf"
    return format_scalar(x)


# --- commands ----------------------------------------------------------------


def cmd_pd_energy(args, inst):
    W = _need(args.demand, inst.demand, "demand")
    sol = solve(inst, W)
    res = io.make_result("pd-energy", inst, throughput=sol.throughput,
                         energy=sol.energy, plan=sol.plan, solution=sol)
    return res, W, len(sol.rounds), EXIT_OK


def cmd_pd_throughput(args, inst):
    E = _need(args.budget, inst.budget, "budget")
    out = maximize_throughput(inst, E, args.eps)
    res = io.make_result("pd-throughput", inst, throughput=out.throughput,
                         energy=out.energy, plan=out.solution.plan,
                         solution=out.solution,
                         extra={"budget": io.dump_scalar(E), "eps": io.dump_scalar(args.eps),
                                "status": out.status, "iterations": out.iterations})
    code = EXIT_INFEASIBLE if out.status == BUDGET_TOO_SMALL else EXIT_OK
    return res, E, out.iterations, code


def cmd_dp(solver_name, fn):
    def run(args, inst):
        E = _need(args.budget, inst.budget, "budget")
        out = fn(inst, E)
        res = io.make_result(solver_name, inst, throughput=out.weight,
                             energy=out.energy, plan=out.plan,
                             extra={"budget": io.dump_scalar(E), "table_size": out.table_size})
        return res, E, out.table_size, EXIT_OK
    return run


def cmd_oracle(args, inst):
    if args.demand is not None or (args.budget is None and inst.budget is None):
        W = _need(args.demand, inst.demand, "demand")
        energy = opt_preemptive(inst, W)
        if energy == float("inf"):
            raise DemandInfeasibleError(f"no job set reaches demand {W}")
        res = io.make_result("oracle-preemptive", inst, throughput=None, energy=energy,
                             extra={"demand": W})
        return res, W, 0, EXIT_OK
    E = _need(args.budget, inst.budget, "budget")
    grid_kind = args.grid
    if grid_kind == "auto":
        grid_kind = "theta" if inst.equal_volume else "phi" if inst.agreeable else "none"
    if args.preemptive or grid_kind == "none":
        w = opt_preemptive_throughput(inst, E)
        name = "oracle-preemptive"
    else:
        grid = build_theta(inst) if grid_kind == "theta" else build_phi(inst)
        w = opt_nonpreemptive(inst, E, grid)
        name = f"oracle-{grid_kind}"
    res = io.make_result(name, inst, throughput=w, energy=None,
                         extra={"budget": io.dump_scalar(E)})
    return res, E, 0, EXIT_OK


COMMANDS = {
    "pd-energy": cmd_pd_energy,
    "pd-throughput": cmd_pd_throughput,
    "dp-equal": cmd_dp("dp-equal", solve_equal),
    "dp-agreeable": cmd_dp("dp-agreeable", solve_agreeable),
    "oracle": cmd_oracle,
}


def verify_result(data: dict) -> list:
    """Problems found when replaying a result file (empty when intact)."""
    problems = []
    inst = io.instance_from_dict(data["instance"], allow_float=True)
    if io.digest(inst) != data.get("instance_digest"):
        problems.append("instance digest mismatch")
    if "plan" not in data:
        return problems
    plan = io.plan_from_list(data["plan"])
    report = validate_plan(inst, plan)
    problems += [str(v) for v in report.violations]
    if not report.ok:
        return problems
    weight = sum(inst.job(j).weight for j in plan.jobs())
    if weight != data.get("throughput"):
        problems.append(f"plan weight {weight} differs from recorded {data.get('throughput')}")
    energy = energy_of(plan, inst.power)
    recorded = data.get("energy")
    if inst.power.exact and recorded is not None and energy != as_scalar(recorded):
        problems.append(f"plan energy {format_scalar(energy)} differs from recorded {recorded}")
    if "budget" in data and data["solver"].startswith("dp-") \
            and energy > as_scalar(data["budget"]):
        problems.append("plan energy exceeds the budget")
    if "dual" in data:
        dual = io.dual_from_dict(data["dual"])
        sol = PdSolution(dual.demand, tuple(data.get("selected", ())), {}, {},
                         profiles_from_plan(plan), plan, energy, dual)
        problems += verify_dual(inst, sol).violations
    return problems


def cmd_verify(args):
    try:
        with open(args.result, encoding="utf-8") as fh:
            data = io.read_result(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.result}: {exc.strerror}") from exc
    problems = verify_result(data)
    for p in problems:
        print(f"FAIL {p}", file=sys.stderr)
    if problems:
        return EXIT_INVARIANT
    print("ok")
    return EXIT_OK


def cmd_gen(args):
    if args.kind == "knapsack" and args.items:
        if args.capacity is None:
            raise UsageError("--capacity is required with --items")
        inst = io.knapsack_instance(io.parse_items(args.items), args.capacity,
                                    args.alpha or 3)
    else:
        params = {"n": args.n, "machines": args.machines, "alpha": args.alpha,
                  "horizon": args.horizon, "p": args.p, "max_w": args.max_weight,
                  "max_p": args.max_p, "capacity": args.capacity}
        allowed = {
            "agreeable": {"n", "machines", "alpha", "horizon", "max_p", "max_w"},
            "equal-volume": {"n", "machines", "alpha", "horizon", "p", "max_w"},
            "knapsack": {"n", "capacity", "alpha"},
        }[args.kind]
        params = {k: v for k, v in params.items() if k in allowed and v is not None}
        inst = io.generate(args.kind, args.seed, **params)
    _emit(io.write_instance(inst), args.out)
    return EXIT_OK


# --- plumbing ----------------------------------------------------------------


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_row(path, row):
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(CSV_COLUMNS)
        writer.writerow(row)


def build_parser():
    ap = argparse.ArgumentParser(prog="speedsched",
                                 description="Energy-aware throughput scheduling solvers.")
    sub = ap.add_subparsers(dest="command", required=True)

    def solver(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--out", help="write the result JSON here instead of stdout")
        p.add_argument("--csv", help="append a summary row to this CSV file")
        p.add_argument("--float", action="store_true",
                       help="allow a non-integer alpha (floating-point arithmetic)")
        return p

    p = solver("pd-energy", "primal-dual: least energy for a throughput demand")
    p.add_argument("--demand", type=int)
    p = solver("pd-throughput", "bisection on demand under an energy budget")
    p.add_argument("--budget", type=_scalar_arg)
    p.add_argument("--eps", type=_scalar_arg, default=Fraction(1, 100))
    for name, text in (("dp-equal", "exact solver for equal volumes"),
                       ("dp-agreeable", "exact solver for agreeable instances")):
        p = solver(name, text)
        p.add_argument("--budget", type=_scalar_arg)
    p = solver("oracle", "exhaustive reference solver for small instances")
    p.add_argument("--demand", type=int, help="least preemptive energy for this demand")
    p.add_argument("--budget", type=_scalar_arg, help="best throughput within this energy")
    p.add_argument("--grid", choices=["auto", "theta", "phi"], default="auto")
    p.add_argument("--preemptive", action="store_true")

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("kind", choices=sorted(io.GENERATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--machines", type=int)
    p.add_argument("--alpha", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--max-p", type=int)
    p.add_argument("--max-weight", type=int)
    p.add_argument("--items", help='knapsack items as "value:size,..."')
    p.add_argument("--capacity", type=_scalar_arg)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="replay the certificates of a result file")
    p.add_argument("result")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "verify":
            return cmd_verify(args)
        inst = _load(args)
        t0 = time.perf_counter()
        res, target, iterations, code = COMMANDS[args.command](args, inst)
        ms = (time.perf_counter() - t0) * 1000
        res["wall_ms"] = round(ms, 3)
        _emit(io.write_result(res), args.out)
        if args.csv:
            name = os.path.splitext(os.path.basename(args.instance))[0]
            _csv_row(args.csv, [name, args.command, inst.n, inst.machines,
                                _fmt(inst.power.alpha), _fmt(target),
                                "" if res["throughput"] is None else res["throughput"],
                                "" if res["energy"] is None else res["energy"],
                                iterations, f"{ms:.3f}"])
        return code
    except DemandInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OracleRefusal as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (InvariantError, ValidationError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (io.FormatError, UsageError, WrongSolverError, ValueError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
