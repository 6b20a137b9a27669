"""Exact non-preemptive solver for agreeable instances on identical machines.

Jobs are taken in EDF order.  F_k(b, w) is the least energy of scheduling jobs
among the first k, of total weight at least w, where machine i only works
before b_i.  Job k, when chosen, is the last job of some machine h: it ends at
min(b_h, d_k), runs at a speed s from the finite speed set, and machine h's
bound drops to its start time, which must lie on the grid and not precede
r_k.  Each state stores the whole vector over w = 0..W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .grids import build_delta, build_phi
from .model import Instance, SchedulePlan, Slice, WrongSolverError

INF = math.inf
MAX_MACHINES = 3


@dataclass
class DpResult:
    weight: int
    energy: Fraction
    plan: SchedulePlan
    table_size: int


class AgreeableDP:
    def __init__(self, instance: Instance):
        if not instance.identical_machines:
            raise WrongSolverError("agreeable DP needs identical machines")
        if not instance.agreeable:
            raise WrongSolverError("instance is not agreeable")
        if instance.machines > MAX_MACHINES:
            raise WrongSolverError(f"more than {MAX_MACHINES} machines")
        self.instance = instance
        self.jobs = instance.jobs
        self.W = instance.total_weight
        self.phi = build_phi(instance)
        self.delta = build_delta(instance)
        self.index = {t: x for x, t in enumerate(self.phi)}
        self.memo: dict = {}
        self._starts: dict = {}
        self._best = None

    def starts(self, k: int, end: int):
        """Feasible (start index, speed, energy) for job k ending at phi[end]."""
        key = (k, end)
        if key not in self._starts:
            job = self.jobs[k - 1]
            p = job.volumes[0]
            e = self.phi[end]
            out = []
            for s in self.delta:
                a = e - p / s
                if a < job.release:
                    continue
                x = self.index.get(a)
                if x is not None:
                    out.append((x, s, self.instance.power.job_energy(p, e - a)))
            self._starts[key] = out
        return self._starts[key]

    def clamp(self, k: int, b: tuple) -> tuple:
        # later recursion only looks at min(b_i, d_k); machines are identical
        if k == 0:
            return ()
        dk = self.index[self.jobs[k - 1].deadline]
        return tuple(sorted(min(x, dk) for x in b))

    def fk(self, k: int, b: tuple):
        """Vector over w = 0..W of F_k(b, w)."""
        b = self.clamp(k, b)
        key = (k, b)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        if k == 0:
            vec = [Fraction(0)] + [INF] * self.W
            self.memo[key] = (vec, None)
            return vec
        prev = self.fk(k - 1, b)
        vec = list(prev)
        choice = [None] * (self.W + 1)
        wk = self.jobs[k - 1].weight
        for h in sorted(set(range(len(b))), key=lambda i: b[i]):
            if h > 0 and b[h] == b[h - 1]:
                continue
            for a_h, s, cost in self.starts(k, b[h]):
                a = b[:h] + (a_h,) + b[h + 1:]
                sub = self.fk(k - 1, a)
                for w in range(self.W + 1):
                    v = sub[max(0, w - wk)]
                    if v == INF:
                        continue
                    v = v + cost
                    if v < vec[w]:
                        vec[w] = v
                        choice[w] = (h, a, s)
        self.memo[key] = (vec, choice)
        return vec

    def box(self):
        """Admissible final bound vectors: grid points in [d_1, d_n], sorted."""
        lo, hi = self.jobs[0].deadline, self.jobs[-1].deadline
        pts = [x for x, t in enumerate(self.phi) if lo <= t <= hi]
        m = self.instance.machines

        def rec(start, depth):
            if depth == 0:
                yield ()
                return
            for y in range(start, len(pts)):
                for rest in rec(y, depth - 1):
                    yield (pts[y],) + rest
        return rec(0, m)

    def best_vector(self):
        """Least energy per weight over the admissible box, with its bound vector."""
        if self._best is None:
            n = len(self.jobs)
            best = [INF] * (self.W + 1)
            arg = [None] * (self.W + 1)
            for b in self.box():
                vec = self.fk(n, b)
                for w, v in enumerate(vec):
                    if v < best[w]:
                        best[w], arg[w] = v, b
            self._best = (best, arg)
        return self._best

    def best_within(self, E) -> DpResult:
        """Largest weight with energy at most E, with a plan achieving it."""
        best, arg = self.best_vector()
        w = max(x for x, v in enumerate(best) if v <= E)
        if w == 0:
            return DpResult(0, Fraction(0), SchedulePlan.empty(self.instance.machines),
                            len(self.memo))
        plan = self.reconstruct(arg[w], w)
        weight = sum(self.instance.job(j).weight for j in plan.jobs())
        return DpResult(weight, best[w], plan, len(self.memo))

    def reconstruct(self, top: tuple, w: int) -> SchedulePlan:
        """Plan of an optimal F_n(top, w) schedule.

        Memo keys hold sorted bound vectors, so the walk carries the actual
        per-machine bounds and maps each choice back to a machine whose
        clamped bound has the chosen value.
        """
        m = self.instance.machines
        bounds = list(top)
        rows = [[] for _ in range(m)]
        k = len(self.jobs)
        while k > 0 and w > 0:
            b = self.clamp(k, tuple(bounds))
            self.fk(k, b)
            c = self.memo[(k, b)][1][w]
            if c is None:
                k -= 1
                continue
            h, a, s = c
            job = self.jobs[k - 1]
            dk = self.index[job.deadline]
            i = next(i for i in range(m) if min(bounds[i], dk) == b[h])
            end = min(self.phi[b[h]], job.deadline)
            rows[i].append(Slice(job.id, self.phi[a[h]], end, s))
            bounds[i] = a[h]
            w = max(0, w - job.weight)
            k -= 1
        return SchedulePlan.from_lists(rows)


def solve_agreeable(instance: Instance, budget=None) -> DpResult:
    """Maximum total weight schedulable non-preemptively within the energy budget."""
    E = instance.budget if budget is None else Fraction(budget)
    if E is None or E < 0:
        raise ValueError("a nonnegative energy budget is required")
    if instance.n == 0:
        return DpResult(0, Fraction(0), SchedulePlan.empty(instance.machines), 0)
    return AgreeableDP(instance).best_within(E)
