"""Brute-force reference solvers for small instances.

Nothing here is used by the production solvers; the point is to certify them.
The oracles only share the domain types from :mod:`speedsched.model`.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

from .model import Instance, PowerModel, SchedulePlan, SchedulingError, Slice

INF = math.inf


class OracleRefusal(SchedulingError):
    """The instance is too large for exhaustive search."""


@dataclass(frozen=True)
class OracleBudget:
    max_jobs: int = 8
    max_machines: int = 3
    max_subsets: int = 1 << 8
    max_grid: int = 2000
    seconds: float = 120.0

    def check(self, instance: Instance, grid=None):
        if instance.n > self.max_jobs:
            raise OracleRefusal(f"{instance.n} jobs > cap {self.max_jobs}")
        if instance.machines > self.max_machines:
            raise OracleRefusal(f"{instance.machines} machines > cap {self.max_machines}")
        if (1 << instance.n) > self.max_subsets:
            raise OracleRefusal("too many subsets")
        if grid is not None and len(grid) > self.max_grid:
            raise OracleRefusal(f"grid of {len(grid)} points > cap {self.max_grid}")

    def clock(self):
        deadline = time.monotonic() + self.seconds

        def tick():
            if time.monotonic() > deadline:
                raise OracleRefusal("oracle wall-clock limit exceeded")
        return tick


DEFAULT_BUDGET = OracleBudget()


# --- YDS ---------------------------------------------------------------------


def _free_parts(a, b, taken):
    """Sub-intervals of [a, b) not covered by the sorted disjoint ``taken``."""
    parts, t = [], a
    for x, y in taken:
        if y <= t or x >= b:
            continue
        if x > t:
            parts.append((t, x))
        t = max(t, y)
    if t < b:
        parts.append((t, b))
    return parts


def yds_min_energy(jobs, power: PowerModel):
    """Minimum-energy preemptive single-machine schedule.

    ``jobs`` is an iterable of ``(id, release, deadline, volume)``.  Returns
    ``(energy, plan)`` where ``plan`` is a one-machine SchedulePlan.  Repeatedly
    takes the interval of highest density (volume of jobs whose window lies
    inside it, divided by its still-free length) and runs those jobs there.
    """
    left = [(jid, Fraction(r), Fraction(d), Fraction(p)) for jid, r, d, p in jobs]
    taken: list = []
    pieces: list = []      # (start, end, speed)
    while left:
        best = None
        for t1 in sorted({r for _, r, _, _ in left}):
            for t2 in sorted({d for _, _, d, _ in left}):
                if t2 <= t1:
                    continue
                inside = [j for j in left if t1 <= j[1] and j[2] <= t2]
                if not inside:
                    continue
                free = sum((y - x for x, y in _free_parts(t1, t2, taken)), Fraction(0))
                if free == 0:
                    raise SchedulingError("job window entirely consumed")
                dens = sum(j[3] for j in inside) / free
                if best is None or dens > best[0]:
                    best = (dens, t1, t2, inside)
        dens, t1, t2, inside = best
        for x, y in _free_parts(t1, t2, taken):
            pieces.append((x, y, dens))
        taken = sorted(taken + _free_parts(t1, t2, taken))
        ids = {j[0] for j in inside}
        left = [j for j in left if j[0] not in ids]
    energy = sum(((y - x) * power.power(s) for x, y, s in pieces), Fraction(0))
    plan = SchedulePlan((_edf_run(jobs, sorted(pieces)),))
    return energy, plan


def _edf_run(jobs, pieces):
    """Run jobs preemptively by EDF over constant-speed pieces."""
    jobs = [(jid, Fraction(r), Fraction(d), Fraction(p)) for jid, r, d, p in jobs]
    rem = {j[0]: j[3] for j in jobs}
    out = []
    for x, y, s in pieces:
        cuts = sorted({x, y} | {j[1] for j in jobs if x < j[1] < y})
        for lo, hi in zip(cuts, cuts[1:]):
            t = lo
            while t < hi:
                ready = [j for j in jobs if j[1] <= t and rem[j[0]] > 0]
                if not ready:
                    break
                jid, _, d, _ = min(ready, key=lambda j: (j[2], j[0]))
                end = min(hi, t + rem[jid] / s)
                rem[jid] -= (end - t) * s
                if out and out[-1].job == jid and out[-1].end == t and out[-1].speed == s:
                    out[-1] = Slice(jid, out[-1].start, end, s)
                else:
                    out.append(Slice(jid, t, end, s))
                t = end
    return tuple(out)


# --- preemptive optimum -----------------------------------------------------


def _machine_costs(instance: Instance, cost_fn, tick):
    n = instance.n
    jobs = instance.jobs
    costs = []
    for i in range(instance.machines):
        row = [Fraction(0)] + [INF] * ((1 << n) - 1)
        for mask in range(1, 1 << n):
            members = [jobs[k] for k in range(n) if mask >> k & 1]
            if any(j.volume(i) is None for j in members):
                continue
            row[mask] = cost_fn(i, members)
            tick()
        costs.append(row)
    return costs


def _combine_machines(costs, n):
    """best[mask] = cheapest split of ``mask`` over all machines."""
    best = list(costs[0])
    for row in costs[1:]:
        nxt = [INF] * (1 << n)
        for mask in range(1 << n):
            sub = mask
            while True:
                a, b = best[sub], row[mask ^ sub]
                if a != INF and b != INF and a + b < nxt[mask]:
                    nxt[mask] = a + b
                if sub == 0:
                    break
                sub = (sub - 1) & mask
        best = nxt
    return best


def preemptive_subset_energies(instance: Instance, budget: OracleBudget = DEFAULT_BUDGET):
    """Optimal preemptive non-migratory energy for every job subset (bitmask)."""
    budget.check(instance)
    tick = budget.clock()

    def cost(i, members):
        return yds_min_energy([(j.id, j.release, j.deadline, j.volume(i))
                               for j in members], instance.power)[0]

    return _combine_machines(_machine_costs(instance, cost, tick), instance.n)


def _weights(instance):
    n = instance.n
    return [sum(instance.jobs[k].weight for k in range(n) if mask >> k & 1)
            for mask in range(1 << n)]


def opt_preemptive(instance: Instance, demand, budget: OracleBudget = DEFAULT_BUDGET):
    """Least energy of a preemptive non-migratory schedule of weight >= demand.

    Returns ``math.inf`` when no subset reaches the demand.
    """
    if demand <= 0:
        return Fraction(0)
    best = preemptive_subset_energies(instance, budget)
    ws = _weights(instance)
    vals = [e for e, w in zip(best, ws) if w >= demand and e != INF]
    return min(vals) if vals else INF


def max_weight_within(energies, weights, budget_energy) -> int:
    return max((w for e, w in zip(energies, weights)
                if e != INF and e <= budget_energy), default=0)


def opt_preemptive_throughput(instance: Instance, energy_budget,
                              budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Largest weight schedulable preemptively within ``energy_budget``."""
    return max_weight_within(preemptive_subset_energies(instance, budget),
                             _weights(instance), energy_budget)


# --- non-preemptive optimum on a time grid ------------------------------------


def _chain_table(seq, grid, power, memo):
    """For a fixed job order, least energy with the first start >= grid[k].

    Jobs run non-preemptively at constant speed with start and completion on
    ``grid``.  Returns a list indexed like ``grid``.
    """
    key = tuple(j.id for j in seq)
    if key in memo:
        return memo[key]
    N = len(grid)
    if not seq:
        out = [Fraction(0)] * (N + 1)
        memo[key] = out
        return out
    rest = _chain_table(seq[1:], grid, power, memo)
    job = seq[0]
    p = job.volumes[0]
    h = [INF] * (N + 1)
    for a in range(N):
        if grid[a] < job.release:
            continue
        if grid[a] >= job.deadline:
            break
        best = INF
        for b in range(a + 1, N):
            if grid[b] > job.deadline:
                break
            if rest[b] == INF:
                continue
            c = power.job_energy(p, grid[b] - grid[a]) + rest[b]
            if c < best:
                best = c
        h[a] = best
    for k in range(N - 1, -1, -1):
        if h[k + 1] < h[k]:
            h[k] = h[k + 1]
    memo[key] = h
    return h


def nonpreemptive_subset_energies(instance: Instance, grid, edf_only=None,
                                  budget: OracleBudget = DEFAULT_BUDGET):
    """Least non-preemptive energy for every subset, times restricted to ``grid``.

    Every machine order is tried (only the EDF order when ``edf_only``; by
    default that is used exactly for agreeable instances).
    """
    if not instance.identical_machines:
        raise SchedulingError("non-preemptive oracle needs identical machines")
    grid = sorted(set(Fraction(g) for g in grid))
    budget.check(instance, grid)
    tick = budget.clock()
    if edf_only is None:
        edf_only = instance.agreeable
    memo: dict = {}
    per_set = {}

    def cost(i, members):
        key = tuple(j.id for j in members)
        if key in per_set:
            return per_set[key]
        orders = [members] if edf_only else itertools.permutations(members)
        best = INF
        for order in orders:
            v = _chain_table(tuple(order), grid, instance.power, memo)[0]
            if v < best:
                best = v
            tick()
        per_set[key] = best
        return best

    return _combine_machines(_machine_costs(instance, cost, tick), instance.n)


def opt_nonpreemptive(instance: Instance, energy_budget, grid, edf_only=None,
                      budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Largest total weight of a non-preemptive grid schedule within the budget."""
    if instance.n == 0:
        return 0
    energies = nonpreemptive_subset_energies(instance, grid, edf_only, budget)
    return max_weight_within(energies, _weights(instance), energy_budget)
