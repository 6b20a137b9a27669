"""Domain types shared by every solver: power model, jobs, instances, plans.

All times, volumes and energies are :class:`fractions.Fraction` values.  With an
integer exponent every quantity produced by the solvers stays rational, so the
whole toolkit works in exact arithmetic.  A non-integer exponent switches the
power algebra to floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence


class SchedulingError(Exception):
    """Base class for errors raised by the toolkit."""


class ValidationError(SchedulingError):
    """A schedule plan violates a structural invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        text = "; ".join(str(v) for v in self.violations) or "invalid plan"
        super().__init__(text)


class InvariantError(SchedulingError):
    """An internal invariant of a solver failed (indicates a bug)."""


class WrongSolverError(SchedulingError):
    """The instance does not belong to the family a solver handles."""


class DemandInfeasibleError(SchedulingError):
    """The throughput demand exceeds what the jobs can provide."""


def as_scalar(x) -> Fraction:
    """Convert ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are refused: the toolkit never silently loses exactness.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to an exact scalar")


def format_scalar(x) -> str:
    if isinstance(x, float):
        return repr(x)
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class PowerModel:
    """Power function ``P(z) = z**alpha``."""

    alpha: int | Fraction | float = 3

    def __post_init__(self):
        a = self.alpha
        if isinstance(a, bool):
            raise TypeError("alpha must be numeric")
        if isinstance(a, Fraction) and a.denominator == 1:
            object.__setattr__(self, "alpha", int(a))
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")

    @property
    def exact(self) -> bool:
        return isinstance(self.alpha, int)

    @property
    def gamma(self):
        """max_z z P'(z) / P(z), which equals alpha for a monomial."""
        return self.alpha

    def power(self, z):
        if self.exact:
            return Fraction(z) ** self.alpha
        return float(z) ** float(self.alpha)

    def deriv(self, z):
        a = self.alpha
        if self.exact:
            return a * Fraction(z) ** (a - 1)
        return float(a) * float(z) ** (float(a) - 1.0)

    def q(self, z):
        """P(z) - z P'(z) = (1 - alpha) z**alpha."""
        return (1 - self.alpha) * self.power(z)

    def job_energy(self, volume, duration):
        """Energy of running ``volume`` at constant speed over ``duration``."""
        return duration * self.power(Fraction(volume) / duration)


@dataclass(frozen=True)
class Job:
    id: int
    release: Fraction
    deadline: Fraction
    weight: int
    # One entry per machine; None marks a machine the job cannot run on.
    volumes: tuple

    def __post_init__(self):
        object.__setattr__(self, "release", as_scalar(self.release))
        object.__setattr__(self, "deadline", as_scalar(self.deadline))
        object.__setattr__(
            self, "volumes",
            tuple(None if v is None else as_scalar(v) for v in self.volumes))
        if self.release < 0:
            raise ValueError(f"job {self.id}: negative release date")
        if self.release >= self.deadline:
            raise ValueError(
                f"job {self.id}: release {self.release} must be before "
                f"deadline {self.deadline}")
        if isinstance(self.weight, bool) or int(self.weight) != self.weight \
                or self.weight <= 0:
            raise ValueError(f"job {self.id}: weight must be a positive integer")
        object.__setattr__(self, "weight", int(self.weight))
        if not self.volumes:
            raise ValueError(f"job {self.id}: no volumes")
        for v in self.volumes:
            if v is not None and v <= 0:
                raise ValueError(f"job {self.id}: volumes must be positive")

    @property
    def span(self) -> Fraction:
        return self.deadline - self.release

    def volume(self, machine: int):
        return self.volumes[machine]

    @property
    def p(self) -> Fraction:
        """The machine-independent volume (identical machines only)."""
        vs = set(self.volumes)
        if len(vs) != 1 or None in vs:
            raise WrongSolverError(f"job {self.id} has machine-dependent volume")
        return self.volumes[0]


@dataclass(frozen=True)
class Instance:
    """A scheduling instance; jobs are kept in EDF order (stable on ties)."""

    machines: int
    jobs: tuple
    power: PowerModel = field(default_factory=PowerModel)
    demand: int | None = None
    budget: Fraction | None = None

    def __post_init__(self):
        if int(self.machines) != self.machines or self.machines < 1:
            raise ValueError("machine count must be a positive integer")
        jobs = tuple(self.jobs)
        ids = [j.id for j in jobs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate job ids")
        for j in jobs:
            if len(j.volumes) != self.machines:
                raise ValueError(
                    f"job {j.id}: expected {self.machines} volumes, "
                    f"got {len(j.volumes)}")
        object.__setattr__(self, "jobs",
                           tuple(sorted(jobs, key=lambda j: (j.deadline, j.release))))
        if self.budget is not None:
            b = as_scalar(self.budget)
            if b < 0:
                raise ValueError("budget must be nonnegative")
            object.__setattr__(self, "budget", b)
        if self.demand is not None and (int(self.demand) != self.demand
                                        or self.demand < 0):
            raise ValueError("demand must be a nonnegative integer")

    @classmethod
    def identical(cls, machines: int, jobs: Iterable[tuple], alpha=3,
                  demand=None, budget=None) -> "Instance":
        """Build from ``(r, d, p, w)`` tuples; ids follow input order from 1."""
        built = [Job(k, r, d, w, (p,) * machines)
                 for k, (r, d, p, w) in enumerate(jobs, start=1)]
        return cls(machines, tuple(built), PowerModel(alpha), demand, budget)

    @property
    def n(self) -> int:
        return len(self.jobs)

    def job(self, job_id: int) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)

    def position(self, job_id: int) -> int:
        """EDF rank of a job, 0-based."""
        for k, j in enumerate(self.jobs):
            if j.id == job_id:
                return k
        raise KeyError(job_id)

    @property
    def total_weight(self) -> int:
        return sum(j.weight for j in self.jobs)

    @property
    def identical_machines(self) -> bool:
        return all(len(set(j.volumes)) == 1 and j.volumes[0] is not None
                   for j in self.jobs)

    @property
    def equal_volume(self) -> bool:
        if not self.identical_machines:
            return False
        return len({j.volumes[0] for j in self.jobs}) <= 1

    @property
    def agreeable(self) -> bool:
        """Release order and deadline order agree: r_a <= r_b iff d_a <= d_b."""
        js = self.jobs
        return all((a.release <= b.release) == (a.deadline <= b.deadline)
                   for a in js for b in js)

    @property
    def omega(self) -> list:
        """Sorted set of all release dates and deadlines."""
        return sorted({j.release for j in self.jobs}
                      | {j.deadline for j in self.jobs})

    def with_jobs(self, jobs) -> "Instance":
        return Instance(self.machines, tuple(jobs), self.power,
                        None, self.budget)


@dataclass(frozen=True)
class Slice:
    job: int
    start: Fraction
    end: Fraction
    speed: Fraction

    @property
    def length(self):
        return self.end - self.start

    @property
    def work(self):
        return (self.end - self.start) * self.speed


@dataclass(frozen=True)
class SchedulePlan:
    """Per machine, a time-ordered tuple of slices."""

    machines: tuple

    @classmethod
    def empty(cls, m: int) -> "SchedulePlan":
        return cls(tuple(() for _ in range(m)))

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[Slice]]) -> "SchedulePlan":
        return cls(tuple(tuple(sorted(s, key=lambda x: x.start))
                         for s in lists))

    @property
    def m(self) -> int:
        return len(self.machines)

    def slices(self):
        for i, row in enumerate(self.machines):
            for s in row:
                yield i, s

    def jobs(self) -> set:
        return {s.job for _, s in self.slices()}

    def machine_of(self, job_id: int):
        ms = {i for i, s in self.slices() if s.job == job_id}
        return ms.pop() if len(ms) == 1 else None

    def restrict(self, machine: int) -> "SchedulePlan":
        rows = [() for _ in self.machines]
        rows[machine] = self.machines[machine]
        return SchedulePlan(tuple(rows))


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self):
        return f"{self.kind}: {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def add(self, kind, message):
        self.violations.append(Violation(kind, message))


def _structural(plan: SchedulePlan, report: ValidationReport):
    for i, row in enumerate(plan.machines):
        for s in row:
            if not s.start < s.end:
                report.add("malformed",
                           f"machine {i}: job {s.job} slice [{s.start}, {s.end}) is empty")
            if not s.speed > 0:
                report.add("malformed",
                           f"machine {i}: job {s.job} has speed {s.speed}")
        ordered = sorted(row, key=lambda s: (s.start, s.end))
        for a, b in zip(ordered, ordered[1:]):
            if b.start < a.end:
                report.add("overlap",
                           f"machine {i}: job {a.job} [{a.start}, {a.end}) overlaps "
                           f"job {b.job} [{b.start}, {b.end})")


def validate_plan(instance: Instance, plan: SchedulePlan) -> ValidationReport:
    """List every violated feasibility invariant of ``plan``."""
    report = ValidationReport()
    if plan.m != instance.machines:
        report.add("machine",
                   f"plan has {plan.m} machines, instance has {instance.machines}")
        return report
    _structural(plan, report)
    ids = {j.id: j for j in instance.jobs}
    work: dict = {}
    where: dict = {}
    for i, s in plan.slices():
        job = ids.get(s.job)
        if job is None:
            report.add("unknown-job", f"machine {i}: unknown job {s.job}")
            continue
        if s.start < job.release or s.end > job.deadline:
            report.add("window",
                       f"job {s.job} runs in [{s.start}, {s.end}) outside "
                       f"[{job.release}, {job.deadline}]")
        where.setdefault(s.job, set()).add(i)
        work[s.job] = work.get(s.job, 0) + s.work
    for jid, machines in sorted(where.items()):
        if len(machines) > 1:
            report.add("migration",
                       f"job {jid} runs on machines {sorted(machines)}")
            continue
        i = next(iter(machines))
        need = ids[jid].volume(i)
        if need is None:
            report.add("machine", f"job {jid} cannot run on machine {i}")
        elif work[jid] != need:
            report.add("volume", f"job {jid} receives {work[jid]} of {need} on machine {i}")
    return report


def energy_of(plan: SchedulePlan, power: PowerModel):
    """Total energy of ``plan``: sum over slices of length * P(speed)."""
    report = ValidationReport()
    _structural(plan, report)
    if not report.ok:
        raise ValidationError(report.violations)
    total = Fraction(0)
    for _, s in plan.slices():
        total += s.length * power.power(s.speed)
    return total


def throughput_of(instance: Instance, plan: SchedulePlan) -> int:
    report = validate_plan(instance, plan)
    if not report.ok:
        raise ValidationError(report.violations)
    return sum(instance.job(j).weight for j in plan.jobs())
