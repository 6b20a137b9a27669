"""Finite time grids and speed sets for the non-preemptive dynamic programs."""

from __future__ import annotations

from fractions import Fraction

from .model import Instance, WrongSolverError


def _subdivisions(omega, parts: int) -> list:
    pts = set(omega)
    for x, a in enumerate(omega):
        for b in omega[x + 1:]:
            for k in range(1, parts + 1):
                step = (b - a) / k
                pts.update(a + l * step for l in range(k + 1))
    return sorted(pts)


def _speeds(omega, numerators) -> list:
    out = set()
    for x, a in enumerate(omega):
        for b in omega[x + 1:]:
            out.update(Fraction(q) / (b - a) for q in numerators)
    return sorted(out)


def common_volume(instance: Instance) -> Fraction:
    if not instance.equal_volume:
        raise WrongSolverError("instance does not have equal job volumes")
    return instance.jobs[0].volumes[0]


def build_theta(instance: Instance) -> list:
    """Points dividing every [a, b], a, b in Omega, into k = 1..n equal parts."""
    common_volume(instance)
    return _subdivisions(instance.omega, instance.n)


def build_lambda(instance: Instance) -> list:
    """Speeds l * p / (b - a) for l = 1..n and a < b in Omega."""
    p = common_volume(instance)
    return _speeds(instance.omega, [l * p for l in range(1, instance.n + 1)])


def total_volume(instance: Instance) -> int:
    if not instance.identical_machines:
        raise WrongSolverError("machines are not identical")
    v = sum(j.volumes[0] for j in instance.jobs)
    if any(j.volumes[0].denominator != 1 for j in instance.jobs):
        raise WrongSolverError("volumes must be integers")
    return int(v)


def build_phi(instance: Instance) -> list:
    """Points dividing every [a, b], a, b in Omega, into k = 1..V equal parts."""
    return _subdivisions(instance.omega, total_volume(instance))


def build_delta(instance: Instance) -> list:
    """Speeds i / (b - a) for i = 1..V and a < b in Omega."""
    return _speeds(instance.omega, range(1, total_volume(instance) + 1))
