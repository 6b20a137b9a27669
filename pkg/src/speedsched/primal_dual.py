"""Primal-dual energy minimization under a throughput demand.

Unrelated machines, preemption allowed, no migration.  Every round tentatively
water-fills each unselected job onto each machine's current speed profile,
prices the pair by the marginal power at the resulting level, raises the dual
variable of the current selected set until one pair becomes tight and commits
that pair.  The committed profiles are turned into a schedule by EDF.

The dual bookkeeping is kept explicitly so that the certificate can be checked
afterwards (:func:`verify_dual`) and the approximation inequalities evaluated
(:func:`guarantee_report`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .model import (DemandInfeasibleError, Instance, InvariantError,
                    SchedulePlan, Slice, energy_of, validate_plan)
from .profile import StepFunction, add, fill, window_min

log = logging.getLogger(__name__)


@dataclass
class DualState:
    """Chain of selected sets with their beta values, plus per-job prices.

    Only sets that were the current selection at some round carry a positive
    beta, so the chain is all that is stored.  ``price[j]`` is the running
    sum over chain sets S not containing j of ``w_j^S * beta_S``.
    """

    demand: Fraction
    chain: list = field(default_factory=list)   # [(frozenset ids, beta)]
    gamma: dict = field(default_factory=dict)
    price: dict = field(default_factory=dict)

    def truncated_weight(self, weight, selected_weight):
        """w_j^S = min(w_j, W - w(S))."""
        return min(Fraction(weight), self.demand - selected_weight)


@dataclass
class RoundRecord:
    lambdas: dict          # (machine, job id) -> marginal power
    machine: int
    job: int
    delta: Fraction        # raise of beta for the selected set of this round
    level: Fraction        # water level of the committed fill


@dataclass
class PdSolution:
    demand: Fraction
    selected: tuple                 # job ids in selection order
    assignment: dict                # job id -> machine
    deltas: dict                    # job id -> StepFunction of its fill
    profiles: tuple                 # final speed profile per machine
    plan: SchedulePlan
    energy: Fraction
    dual: DualState
    throughput: int = 0
    rounds: list = field(default_factory=list)


@dataclass
class _State:
    instance: Instance
    dual: DualState
    profiles: list
    selected: list = field(default_factory=list)
    assignment: dict = field(default_factory=dict)
    deltas: dict = field(default_factory=dict)
    rounds: list = field(default_factory=list)

    @property
    def selected_weight(self):
        return sum(self.instance.job(j).weight for j in self.selected)


def lambda_table(instance: Instance, profiles, excluded=()) -> dict:
    """Marginal power of each (machine, unselected job) pair.

    The job is water-filled onto a copy of the machine profile over its
    window; the entry is P' at the resulting level.  Pairs whose volume is
    undefined are left out.  ``profiles`` are not modified.
    """
    power = instance.power
    table = {}
    excluded = set(excluded)
    for i in range(instance.machines):
        for job in instance.jobs:
            if job.id in excluded:
                continue
            p = job.volume(i)
            if p is None:
                continue
            level, _ = fill(profiles[i], job.release, job.deadline, p)
            table[(i, job.id)] = power.deriv(level)
    return table


def _start(instance: Instance, demand) -> _State:
    dual = DualState(Fraction(demand))
    for job in instance.jobs:
        dual.price[job.id] = Fraction(0)
    return _State(instance, dual,
                  [StepFunction() for _ in range(instance.machines)])


def run_round(state: _State) -> RoundRecord:
    """Raise beta of the current selected set until a pair becomes tight.

    Ties are broken by machine index, then by EDF position of the job.
    """
    inst = state.instance
    dual = state.dual
    w_sel = state.selected_weight
    if w_sel >= dual.demand:
        raise InvariantError("round requested although the demand is met")
    table = lambda_table(inst, state.profiles, state.selected)
    if not table:
        raise DemandInfeasibleError(
            f"demand {dual.demand} not reachable: selected weight {w_sel} "
            f"and no assignable job left")
    pos = {j.id: k for k, j in enumerate(inst.jobs)}
    best = None
    for (i, jid), lam in table.items():
        job = inst.job(jid)
        wt = dual.truncated_weight(job.weight, w_sel)
        raise_by = (job.volume(i) * lam - dual.price[jid]) / wt
        key = (raise_by, i, pos[jid])
        if best is None or key < best[0]:
            best = (key, i, jid)
    (delta, _, _), i, jid = best
    if not inst.power.exact and -1e-9 < delta < 0:
        delta = 0.0        # rounding noise of floating-point mode
    if delta < 0:
        raise InvariantError(f"negative dual raise {delta}")

    current = frozenset(state.selected)
    dual.chain.append((current, delta))
    for job in inst.jobs:
        if job.id not in current:
            dual.price[job.id] += dual.truncated_weight(job.weight, w_sel) * delta

    job = inst.job(jid)
    level, d = fill(state.profiles[i], job.release, job.deadline, job.volume(i))
    state.profiles[i] = add(state.profiles[i], d)
    state.assignment[jid] = i
    state.deltas[jid] = d
    state.selected.append(jid)
    dual.gamma[jid] = job.volume(i) * table[(i, jid)]
    rec = RoundRecord(table, i, jid, delta, level)
    state.rounds.append(rec)
    log.debug("round %d: job %s -> machine %d, beta raise %s",
              len(state.rounds), jid, i, delta)
    return rec


def build_edf_plan(instance: Instance, assignment: dict, profiles) -> SchedulePlan:
    """Run the assigned jobs of each machine by EDF at the machine's profile."""
    rows = []
    pos = {j.id: k for k, j in enumerate(instance.jobs)}
    for i in range(instance.machines):
        jobs = [instance.job(j) for j, mi in assignment.items() if mi == i]
        rows.append(_edf_machine(i, jobs, profiles[i], pos))
    return SchedulePlan(tuple(rows))


def _edf_machine(i, jobs, profile: StepFunction, pos):
    if not jobs:
        if profile:
            raise InvariantError(f"machine {i} has speed but no jobs")
        return ()
    remaining = {j.id: j.volume(i) for j in jobs}
    events = sorted(set(profile.breakpoints) | {j.release for j in jobs})
    slices = []
    t = events[0]
    while any(remaining.values()):
        later = [e for e in events if e > t]
        nxt = later[0] if later else None
        speed = profile(t)
        ready = [j for j in jobs if j.release <= t and remaining[j.id] > 0]
        if speed == 0 or not ready:
            if speed > 0:
                raise InvariantError(f"machine {i}: idle capacity at {t}")
            if nxt is None:
                raise InvariantError(f"machine {i}: jobs left without capacity")
            t = nxt
            continue
        job = min(ready, key=lambda j: (j.deadline, pos[j.id]))
        finish = t + remaining[job.id] / speed
        end = finish if nxt is None or finish < nxt else nxt
        if end > job.deadline:
            raise InvariantError(f"machine {i}: job {job.id} misses its deadline")
        remaining[job.id] -= (end - t) * speed
        prev = slices[-1] if slices else None
        if prev and prev.job == job.id and prev.end == t and prev.speed == speed:
            slices[-1] = Slice(job.id, prev.start, end, speed)
        else:
            slices.append(Slice(job.id, t, end, speed))
        t = end
    if profile and t < profile.breakpoints[-1]:
        raise InvariantError(f"machine {i}: capacity left after all jobs completed")
    return tuple(slices)


def solve(instance: Instance, demand) -> PdSolution:
    """Select, assign and speed-scale jobs so that their weight reaches ``demand``."""
    demand = Fraction(demand)
    if demand < 0:
        raise ValueError("negative demand")
    if demand > instance.total_weight:
        raise DemandInfeasibleError(
            f"demand {demand} exceeds total weight {instance.total_weight}")
    state = _start(instance, demand)
    while state.selected_weight < demand:
        run_round(state)
    plan = build_edf_plan(instance, state.assignment, state.profiles)
    energy = sum((p.integrate(instance.power.power) for p in state.profiles),
                 Fraction(0))
    if instance.power.exact:
        report = validate_plan(instance, plan)
        if not report.ok:
            raise InvariantError(f"primal-dual plan invalid: {report.violations}")
        if energy_of(plan, instance.power) != energy:
            raise InvariantError("plan energy differs from profile energy")
    return PdSolution(demand, tuple(state.selected), dict(state.assignment),
                      dict(state.deltas), tuple(state.profiles), plan, energy,
                      state.dual, state.selected_weight, state.rounds)


# --- certificates -----------------------------------------------------------


@dataclass
class DualReport:
    violations: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)   # (i, j) -> lambda-hat

    @property
    def ok(self):
        return not self.violations


def profiles_from_plan(plan: SchedulePlan) -> tuple:
    out = []
    for row in plan.machines:
        prof = StepFunction()
        for s in row:
            prof = add(prof, StepFunction.constant(s.start, s.end, s.speed))
        out.append(prof)
    return tuple(out)


def _prices(instance: Instance, dual: DualState) -> dict:
    """Recompute sum_{S in chain, j not in S} w_j^S beta_S from the chain."""
    weight = {j.id: j.weight for j in instance.jobs}
    out = {}
    for j in instance.jobs:
        total = Fraction(0)
        for s, beta in dual.chain:
            if j.id not in s:
                w_s = sum(weight[x] for x in s)
                total += min(Fraction(j.weight), dual.demand - w_s) * beta
        out[j.id] = total
    return out


def verify_dual(instance: Instance, solution: PdSolution) -> DualReport:
    """Check the two dual constraint families for the final solution.

    Witness for every pair (i, j): lambda-hat = P'(level of water-filling j
    onto the final profile of machine i).  The marginal-power constraint is
    checked on the profile with that tentative fill in place, the knapsack
    price constraint with gamma_j = 0 for unselected jobs.
    """
    power = instance.power
    report = DualReport()
    dual = solution.dual
    for s, beta in dual.chain:
        if beta < 0:
            report.violations.append(f"beta of {sorted(s)} is negative ({beta})")
    prices = _prices(instance, dual)
    for jid, stored in dual.price.items():
        if stored != prices.get(jid):
            report.violations.append(
                f"stored price of job {jid} is {stored}, chain gives {prices.get(jid)}")
    for i in range(instance.machines):
        prof = solution.profiles[i]
        for job in instance.jobs:
            p = job.volume(i)
            if p is None:
                continue
            level, d = fill(prof, job.release, job.deadline, p)
            lam = power.deriv(level)
            report.witnesses[(i, job.id)] = lam
            floor = window_min(add(prof, d), job.release, job.deadline)
            if lam > power.deriv(floor):
                report.violations.append(
                    f"lambda({i},{job.id}) = {lam} exceeds P'(v) = {power.deriv(floor)}")
            gamma = dual.gamma.get(job.id, Fraction(0))
            if gamma < 0:
                report.violations.append(f"gamma of job {job.id} is negative")
            if prices[job.id] > gamma + lam * p:
                report.violations.append(
                    f"price of job {job.id} ({prices[job.id]}) exceeds "
                    f"gamma + lambda*p = {gamma + lam * p} on machine {i}")
    return report


@dataclass
class GuaranteeReport:
    lambda_p: Fraction          # sum of lambda*p over committed pairs
    dual_mass: Fraction         # sum_S beta_S (W - w(S))
    energy: Fraction
    q_integral: Fraction
    gamma_sum: Fraction
    per_machine: list           # (sum lambda*p, energy) per machine
    checks: dict

    @property
    def ok(self):
        return all(self.checks.values())


def guarantee_report(instance: Instance, solution: PdSolution, demand=None) -> GuaranteeReport:
    """Evaluate the inequalities behind the 2(Gamma+1) energy guarantee."""
    power = instance.power
    W = Fraction(solution.demand if demand is None else demand)
    weight = {j.id: j.weight for j in instance.jobs}
    dual_mass = sum(((W - sum(weight[x] for x in s)) * beta
                     for s, beta in solution.dual.chain), Fraction(0))
    per_machine = []
    lp_total = Fraction(0)
    for i in range(instance.machines):
        lp = Fraction(0)
        for rec in solution.rounds:
            if rec.machine == i:
                lp += rec.lambdas[(i, rec.job)] * instance.job(rec.job).volume(i)
        e_i = solution.profiles[i].integrate(power.power)
        per_machine.append((lp, e_i))
        lp_total += lp
    energy = sum((e for _, e in per_machine), Fraction(0))
    q_int = sum((p.integrate(power.q) for p in solution.profiles), Fraction(0))
    gamma_sum = sum(solution.dual.gamma.values(), Fraction(0))
    g = power.gamma
    checks = {
        "lambda_p_le_twice_dual": lp_total <= 2 * dual_mass,
        "lambda_p_ge_energy_per_machine": all(lp >= e for lp, e in per_machine),
        "dual_objective_ge_energy":
            (2 * g + 2) * dual_mass + q_int - gamma_sum >= energy,
        "gamma_equals_lambda_p": gamma_sum == lp_total,
    }
    return GuaranteeReport(lp_total, dual_mass, energy, q_int, gamma_sum,
                           per_machine, checks)
