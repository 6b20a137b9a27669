"""Exact non-preemptive solver for equal-volume jobs on identical machines.

Jobs are taken in EDF order.  A state describes a sub-problem by

* a prefix length k: only jobs 1..k may be used;
* a release window [rho, sigma): only jobs released inside it may be used;
* per machine i a time window [a_i, b_i] that its jobs must fit in.

The value is the vector over w = 0..W of the least energy needed to schedule
jobs of total weight at least w.  If job k is used, it runs on some machine h
over [u_h, e'] at a speed from the finite speed set.  The remaining jobs split
at a release threshold tau into an early part (released in [rho, tau), placed
before a cut vector u) and a late part (released in [tau, sigma), placed after
u, with machine h only available from e' on).  Every time lies on the grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .grids import build_lambda, build_theta, common_volume
from .model import Instance, SchedulePlan, Slice, WrongSolverError

INF = math.inf
MAX_MACHINES = 3
DEAD = (-1, -1)


@dataclass
class EqualResult:
    weight: int
    energy: Fraction
    plan: SchedulePlan
    table_size: int


class EqualDP:
    def __init__(self, instance: Instance):
        if not instance.identical_machines:
            raise WrongSolverError("equal-volume DP needs identical machines")
        if instance.machines > MAX_MACHINES:
            raise WrongSolverError(f"more than {MAX_MACHINES} machines")
        self.instance = instance
        self.jobs = instance.jobs
        self.p = common_volume(instance)
        self.W = instance.total_weight
        self.m = instance.machines
        self.theta = build_theta(instance)
        self.speeds = build_lambda(instance)
        self.index = {t: x for x, t in enumerate(self.theta)}
        self.releases = sorted({j.release for j in self.jobs})
        self.rank = [self.releases.index(j.release) for j in self.jobs]
        self.rel_idx = [self.index[j.release] for j in self.jobs]
        self.dl_idx = [self.index[j.deadline] for j in self.jobs]
        durations = {self.p / s for s in self.speeds}
        power = instance.power
        self.runs = []          # runs[x] = [(end index, speed, energy)]
        for x, t in enumerate(self.theta):
            row = []
            for y in range(x + 1, len(self.theta)):
                d = self.theta[y] - t
                if d in durations:
                    row.append((y, self.p / d, power.job_energy(self.p, d)))
            self.runs.append(row)
        self.unit = _integer_costs(self.runs) if power.exact else 1
        R = len(self.releases)
        self._has = [[[any(lo <= self.rank[j] < hi for j in range(k))
                       for hi in range(R + 1)] for lo in range(R + 1)]
                     for k in range(self.instance.n + 1)]
        self.memo: dict = {}
        self.raw: dict = {}

    # -- state normalisation -------------------------------------------------

    def canonical(self, k, rho, sigma, windows):
        """Normalise a state; returns (key, order) or (None, None) if empty.

        ``order[c]`` is the caller's machine sitting at canonical position c.
        """
        elig = [j for j in range(k) if rho <= self.rank[j] < sigma]
        if not elig:
            return None, None
        k = elig[-1] + 1
        rho = min(self.rank[j] for j in elig)
        sigma = max(self.rank[j] for j in elig) + 1
        lo = min(self.rel_idx[j] for j in elig)
        hi = max(self.dl_idx[j] for j in elig)
        clamped = []
        for i, (a, b) in enumerate(windows):
            a, b = max(a, lo), min(b, hi)
            clamped.append((DEAD if a >= b else (a, b), i))
        if all(c == DEAD for c, _ in clamped):
            return None, None
        clamped.sort()
        key = (k, rho, sigma, tuple(c for c, _ in clamped))
        return key, [i for _, i in clamped]

    def zero(self):
        return [0] + [INF] * self.W

    def energy(self, v):
        """Convert an internal table value back to an energy."""
        return v * self.unit

    def value(self, k, rho, sigma, windows):
        raw = (k, rho, sigma, tuple(windows))
        hit = self.raw.get(raw)
        if hit is None:
            key, _ = self.canonical(k, rho, sigma, windows)
            hit = self.zero() if key is None else self.solve_key(key)[0]
            self.raw[raw] = hit
        return hit

    def has_jobs(self, k, rho, sigma):
        return self._has[k][rho][sigma]

    # -- recursion -----------------------------------------------------------

    def solve_key(self, key):
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        k, rho, sigma, wins = key
        job = self.jobs[k - 1]
        wk = job.weight
        vec = list(self.value(k - 1, rho, sigma, wins))
        choice = [None] * (self.W + 1)
        rk, dk = self.rel_idx[k - 1], self.dl_idx[k - 1]
        seen = set()
        for h, (ah, bh) in enumerate(wins):
            if wins[h] == DEAD or wins[h] in seen:
                continue
            seen.add(wins[h])
            top = min(bh, dk)
            slots = [(uh, e, sp, cost) for uh in range(max(ah, rk), top)
                     for e, sp, cost in self.runs[uh] if e <= top]
            if not slots:
                continue
            for tau in range(rho, sigma + 1):
                self._place(k - 1, rho, tau, sigma, wins, h, slots, wk, vec, choice)
        out = (vec, choice)
        self.memo[key] = out
        return out

    def _place(self, k, rho, tau, sigma, wins, h, slots, wk, vec, choice):
        """Try job k+1 in every slot on machine h with threshold tau.

        The early value can only improve as a cut moves later and the late
        value can only get worse, so a cut is skipped when moving one
        coordinate earlier keeps the early vector, or moving it later keeps
        the late vector while improving the early one.
        """
        early_jobs = self.has_jobs(k, rho, tau)
        late_jobs = self.has_jobs(k, tau, sigma)
        ranges = []
        for i, (a, b) in enumerate(wins):
            if i == h or wins[i] == DEAD or not early_jobs:
                ranges.append((a,))
            elif not late_jobs:
                ranges.append((b,))
            else:
                ranges.append(range(a, b + 1))
        cuts = list(itertools.product(*ranges))
        ah, bh = wins[h]
        starts = sorted({uh for uh, _, _, _ in slots})
        ends = sorted({e for _, e, _, _ in slots})
        v1s, v2s = {}, {}
        for c in cuts:
            for uh in starts:
                early = [(a, x) for (a, _), x in zip(wins, c)]
                early[h] = (ah, uh)
                v1s[c, uh] = self.value(k, rho, tau, early)
            for e in ends:
                late = [(x, b) for (_, b), x in zip(wins, c)]
                late[h] = (e, bh)
                v2s[c, e] = self.value(k, tau, sigma, late)
        moves = [i for i, r in enumerate(ranges) if len(r) > 1]
        # a longer run with the same neighbouring values is cheaper
        next_end, prev_start = {}, {}
        for uh in starts:
            es = sorted(e for x, e, _, _ in slots if x == uh)
            next_end.update({(uh, e): f for e, f in zip(es, es[1:])})
        for e in ends:
            us = sorted(x for x, y, _, _ in slots if y == e)
            prev_start.update({(x, e): w for w, x in zip(us, us[1:])})
        for uh, e, sp, cost in slots:
            ne, ps = next_end.get((uh, e)), prev_start.get((uh, e))
            for c in cuts:
                v1, v2 = v1s[c, uh], v2s[c, e]
                if v1[0] == INF or v2[0] == INF:
                    continue
                if vec[-1] != INF and v1[0] + v2[0] + cost >= vec[-1]:
                    continue
                if (ne is not None and v2s[c, ne] == v2) or (
                        ps is not None and v1s[c, ps] == v1):
                    continue
                dominated = False
                for i in moves:
                    lower = c[:i] + (c[i] - 1,) + c[i + 1:]
                    upper = c[:i] + (c[i] + 1,) + c[i + 1:]
                    if v1s.get((lower, uh)) == v1:
                        dominated = True
                        break
                    # strict on the early side so two equal cuts never
                    # rule each other out
                    if v2s.get((upper, e)) == v2 and v1s[upper, uh] != v1:
                        dominated = True
                        break
                if dominated:
                    continue
                u = list(c)
                u[h] = uh
                self._combine(vec, choice, v1, v2, cost, wk,
                              (h, uh, e, sp, tau, tuple(u)))

    def _combine(self, vec, choice, v1, v2, cost, wk, tag):
        W = self.W
        f1 = [(w1, x + cost) for w1, x in enumerate(v1) if x != INF]
        for w in range(W + 1):
            need = w - wk if w > wk else 0
            best = vec[w]
            arg = None
            for w1, x in f1:
                if w1 > need:
                    break
                y = v2[need - w1]
                if y != INF and x + y < best:
                    best, arg = x + y, w1
            if arg is not None:
                vec[w] = best
                choice[w] = tag + (arg,)

    def top(self):
        return (self.instance.n, 0, len(self.releases),
                [(0, len(self.theta) - 1)] * self.m)

    def energies(self) -> list:
        """Least energy for total weight at least w, for w = 0..W."""
        return [v if v == INF else self.energy(v) for v in self.value(*self.top())]

    def best_within(self, E) -> EqualResult:
        """Largest weight with energy at most E, with a plan achieving it."""
        m = self.m
        table = self.energies()
        w = max(x for x, v in enumerate(table) if v <= E)
        if w == 0:
            return EqualResult(0, Fraction(0), SchedulePlan.empty(m), len(self.memo))
        pairs: list = []
        self.rows(*self.top(), w, pairs)
        lists = [[] for _ in range(m)]
        for i, sl in pairs:
            lists[i].append(sl)
        plan = SchedulePlan.from_lists(lists)
        weight = sum(self.instance.job(j).weight for j in plan.jobs())
        return EqualResult(weight, table[w], plan, len(self.memo))

    # -- reconstruction ------------------------------------------------------

    def rows(self, k, rho, sigma, windows, w, out):
        """Append (machine, Slice) pairs of an optimal schedule to ``out``."""
        if w <= 0:
            return
        key, order = self.canonical(k, rho, sigma, windows)
        if key is None:
            return
        choice = self.solve_key(key)[1]
        k, rho, sigma, wins = key
        c = choice[w]
        if c is None:
            self.rows(k - 1, rho, sigma, windows, w, out)
            return
        h, uh, e, s, tau, u, w1 = c
        job = self.jobs[k - 1]
        out.append((order[h], Slice(job.id, self.theta[uh], self.theta[e], s)))
        early, late = [None] * self.m, [None] * self.m
        for pos, i in enumerate(order):
            a, b = wins[pos]
            early[i] = (a, u[pos])
            late[i] = (u[pos], b)
        early[order[h]] = (wins[h][0], uh)
        late[order[h]] = (e, wins[h][1])
        self.rows(k - 1, rho, tau, early, w1, out)
        self.rows(k - 1, tau, sigma, late, max(0, w - job.weight - w1), out)


def _integer_costs(runs):
    """Rescale exact run costs to integers in place; returns the unit."""
    den = 1
    for row in runs:
        for _, _, c in row:
            den = math.lcm(den, c.denominator)
    for row in runs:
        row[:] = [(y, s, int(c * den)) for y, s, c in row]
    return Fraction(1, den)


def solve_equal(instance: Instance, budget=None) -> EqualResult:
    """Maximum total weight schedulable non-preemptively within the energy budget."""
    E = instance.budget if budget is None else Fraction(budget)
    if E is None or E < 0:
        raise ValueError("a nonnegative energy budget is required")
    if instance.n == 0:
        return EqualResult(0, Fraction(0), SchedulePlan.empty(instance.machines), 0)
    return EqualDP(instance).best_within(E)
