"""Instance and result files, plus seeded instance generators.

Files are JSON.  Every rational is written as an integer or a ``"num/den"``
string so that reading back gives exactly the same values.
"""

from __future__ import annotations

import hashlib
import json
import random
from fractions import Fraction

from .model import (Instance, Job, PowerModel, SchedulePlan, SchedulingError,
                    Slice, as_scalar, format_scalar)
from .primal_dual import DualState, PdSolution

FORMAT_VERSION = 1


class FormatError(SchedulingError):
    """A file could not be parsed; ``where`` locates the problem."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


# --- scalars -----------------------------------------------------------------


def _scalar(value, where, allow_float=False):
    if isinstance(value, float):
        if allow_float:
            return value
        raise FormatError(where, f"floating-point number {value!r}; write it as \"num/den\"")
    try:
        return as_scalar(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(where, f"not a rational number: {value!r}") from exc


def _integer(value, where):
    x = _scalar(value, where)
    if x.denominator != 1:
        raise FormatError(where, f"expected an integer, got {format_scalar(x)}")
    return int(x)


def dump_scalar(x):
    """Serialize a scalar: ints stay ints, other rationals become strings."""
    if isinstance(x, float):
        return x
    x = Fraction(x)
    return int(x) if x.denominator == 1 else format_scalar(x)


# --- instances ---------------------------------------------------------------


def parse_alpha(value, where="alpha", allow_float=False):
    a = _scalar(value, where, allow_float=True)
    if isinstance(a, float) or a.denominator != 1:
        if not allow_float:
            raise FormatError(where, "non-integer alpha needs floating-point mode (--float)")
        return float(a)
    return int(a)


def instance_from_dict(data, allow_float=False) -> Instance:
    if not isinstance(data, dict):
        raise FormatError("$", "expected an object")
    for key in ("alpha", "machines", "jobs"):
        if key not in data:
            raise FormatError("$", f"missing field {key!r}")
    alpha = parse_alpha(data["alpha"], "alpha", allow_float)
    m = _integer(data["machines"], "machines")
    if m < 1:
        raise FormatError("machines", "must be at least 1")
    jobs_in = data["jobs"]
    if not isinstance(jobs_in, list):
        raise FormatError("jobs", "expected a list")
    jobs = []
    for k, item in enumerate(jobs_in):
        where = f"jobs[{k}]"
        if not isinstance(item, dict):
            raise FormatError(where, "expected an object")
        for key in ("r", "d", "w", "p"):
            if key not in item:
                raise FormatError(where, f"missing field {key!r}")
        jid = _integer(item.get("id", k + 1), f"{where}.id")
        p = item["p"]
        if isinstance(p, list):
            if len(p) != m:
                raise FormatError(f"{where}.p", f"expected {m} volumes, got {len(p)}")
            vols = tuple(None if v is None else _scalar(v, f"{where}.p[{i}]")
                         for i, v in enumerate(p))
        else:
            vols = (_scalar(p, f"{where}.p"),) * m
        try:
            jobs.append(Job(jid, _scalar(item["r"], f"{where}.r"),
                            _scalar(item["d"], f"{where}.d"),
                            _integer(item["w"], f"{where}.w"), vols))
        except ValueError as exc:
            raise FormatError(where, str(exc)) from exc
    demand = data.get("demand")
    budget = data.get("budget")
    try:
        return Instance(m, tuple(jobs), PowerModel(alpha),
                        None if demand is None else _integer(demand, "demand"),
                        None if budget is None else _scalar(budget, "budget"))
    except ValueError as exc:
        raise FormatError("$", str(exc)) from exc


def instance_to_dict(instance: Instance) -> dict:
    jobs = []
    for j in instance.jobs:
        if len(set(j.volumes)) == 1 and j.volumes[0] is not None:
            p = dump_scalar(j.volumes[0])
        else:
            p = [None if v is None else dump_scalar(v) for v in j.volumes]
        jobs.append({"id": j.id, "r": dump_scalar(j.release), "d": dump_scalar(j.deadline),
                     "w": j.weight, "p": p})
    out = {"alpha": instance.power.alpha, "machines": instance.machines, "jobs": jobs}
    if instance.demand is not None:
        out["demand"] = instance.demand
    if instance.budget is not None:
        out["budget"] = dump_scalar(instance.budget)
    return out


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc


def read_instance(text: str, allow_float=False) -> Instance:
    return instance_from_dict(_load_json(text), allow_float)


def write_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def digest(instance: Instance) -> str:
    canonical = json.dumps(instance_to_dict(instance), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# --- results -----------------------------------------------------------------


def plan_to_list(plan: SchedulePlan) -> list:
    return [[{"job": s.job, "start": dump_scalar(s.start), "end": dump_scalar(s.end),
              "speed": dump_scalar(s.speed)} for s in row] for row in plan.machines]


def plan_from_list(rows, where="plan") -> SchedulePlan:
    if not isinstance(rows, list):
        raise FormatError(where, "expected a list of machines")
    out = []
    for i, row in enumerate(rows):
        slices = []
        for k, s in enumerate(row):
            w = f"{where}[{i}][{k}]"
            try:
                slices.append(Slice(_integer(s["job"], f"{w}.job"),
                                    _scalar(s["start"], f"{w}.start", True),
                                    _scalar(s["end"], f"{w}.end", True),
                                    _scalar(s["speed"], f"{w}.speed", True)))
            except (KeyError, TypeError) as exc:
                raise FormatError(w, "malformed slice") from exc
        out.append(tuple(slices))
    return SchedulePlan(tuple(out))


def dual_to_dict(dual: DualState) -> dict:
    return {
        "demand": dump_scalar(dual.demand),
        "chain": [{"set": sorted(s), "beta": dump_scalar(b)} for s, b in dual.chain],
        "gamma": {str(j): dump_scalar(g) for j, g in sorted(dual.gamma.items())},
        "price": {str(j): dump_scalar(p) for j, p in sorted(dual.price.items())},
    }


def dual_from_dict(data) -> DualState:
    try:
        return DualState(
            _scalar(data["demand"], "dual.demand"),
            [(frozenset(c["set"]), _scalar(c["beta"], "dual.chain.beta", True))
             for c in data["chain"]],
            {int(j): _scalar(g, f"dual.gamma.{j}", True) for j, g in data["gamma"].items()},
            {int(j): _scalar(p, f"dual.price.{j}", True) for j, p in data["price"].items()},
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError("dual", "malformed dual certificate") from exc


def make_result(solver: str, instance: Instance, *, throughput, energy, plan=None,
                solution: PdSolution | None = None, extra=None, ms=0.0) -> dict:
    out = {
        "format": FORMAT_VERSION,
        "solver": solver,
        "instance_digest": digest(instance),
        "instance": instance_to_dict(instance),
        "throughput": throughput,
        "energy": None if energy is None else dump_scalar(energy),
        "wall_ms": round(ms, 3),
    }
    if plan is not None:
        out["plan"] = plan_to_list(plan)
    if solution is not None:
        out["demand"] = dump_scalar(solution.demand)
        out["selected"] = list(solution.selected)
        out["dual"] = dual_to_dict(solution.dual)
    if extra:
        out.update(extra)
    return out


def write_result(result: dict) -> str:
    return json.dumps(result, indent=2) + "\n"


def read_result(text: str) -> dict:
    data = _load_json(text)
    if not isinstance(data, dict) or "solver" not in data or "instance" not in data:
        raise FormatError("$", "not a result file")
    return data


# --- generators --------------------------------------------------------------


def knapsack_instance(items, capacity, alpha=3) -> Instance:
    """Single-machine instance encoding a knapsack.

    Item (value, size) becomes a unit-volume job with the value as weight.
    Windows have the item sizes as lengths and are laid end to end from 0;
    the energy budget is the capacity.
    """
    jobs, t = [], Fraction(0)
    for k, (value, size) in enumerate(items, start=1):
        size = as_scalar(size)
        jobs.append(Job(k, t, t + size, int(value), (Fraction(1),)))
        t += size
    return Instance(1, tuple(jobs), PowerModel(alpha), None, as_scalar(capacity))


def parse_items(text: str) -> list:
    """``"value:size,value:size"`` -> list of (value, size)."""
    items = []
    for k, part in enumerate(text.split(",")):
        try:
            value, size = part.split(":")
            items.append((int(value), as_scalar(size)))
        except ValueError as exc:
            raise FormatError(f"items[{k}]", f"expected value:size, got {part!r}") from exc
    return items


def gen_agreeable(seed, n=5, machines=1, alpha=3, horizon=10, max_p=3,
                  max_w=3) -> Instance:
    """Random instance whose release order matches its deadline order."""
    rng = random.Random(seed)
    rs = sorted(rng.randint(0, horizon - 1) for _ in range(n))
    ds = []
    for k, r in enumerate(rs):
        if k and r == rs[k - 1]:
            ds.append(ds[-1])
            continue
        lo = max(r + 1, ds[-1] + 1 if ds else 0)
        ds.append(rng.randint(lo, max(lo, horizon + n)))
    jobs = [(r, d, rng.randint(1, max_p), rng.randint(1, max_w))
            for r, d in zip(rs, ds)]
    return Instance.identical(machines, jobs, alpha)


def gen_equal_volume(seed, n=5, machines=1, alpha=3, horizon=6, p=1,
                     max_w=3) -> Instance:
    """Random instance in which every job has volume ``p``."""
    rng = random.Random(seed)
    jobs = []
    for _ in range(n):
        r = rng.randint(0, horizon - 1)
        d = rng.randint(r + 1, horizon)
        jobs.append((r, d, p, rng.randint(1, max_w)))
    return Instance.identical(machines, jobs, alpha)


def gen_knapsack(seed, n=5, max_value=5, max_size=4, capacity=None,
                 alpha=3) -> Instance:
    rng = random.Random(seed)
    items = [(rng.randint(1, max_value), rng.randint(1, max_size)) for _ in range(n)]
    if capacity is None:
        capacity = rng.randint(1, sum(c for _, c in items))
    return knapsack_instance(items, capacity, alpha)


GENERATORS = {
    "agreeable": gen_agreeable,
    "equal-volume": gen_equal_volume,
    "knapsack": gen_knapsack,
}


def generate(kind: str, seed, **params) -> Instance:
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown generator kind {kind!r}") from None
    return gen(seed, **params)
