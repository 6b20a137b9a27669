"""Throughput maximization under an energy budget.

Bisects the throughput demand W over the rationals in [0, total weight], using
the primal-dual solver as the energy oracle E(W), until a probe lands in
[E, (1 + eps) E].  Monotonicity of E(W) is not guaranteed, so the best probe
within (1 + eps) E is remembered and returned if the iteration cap is reached.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from .model import Instance
from .primal_dual import PdSolution, solve

log = logging.getLogger(__name__)

CONVERGED = "converged"
BUDGET_TOO_SMALL = "budget-too-small"
DEGENERATE = "degenerate"


@dataclass
class DichotomyResult:
    demand: Fraction
    solution: PdSolution
    iterations: int
    status: str

    @property
    def throughput(self) -> int:
        return self.solution.throughput

    @property
    def energy(self):
        return self.solution.energy


def ceil_log2(x) -> int:
    """Smallest integer k with 2**k >= x, for rational x > 0."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("ceil_log2 needs a positive argument")
    k = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** k < x:
        k += 1
    while Fraction(2) ** (k - 1) >= x:
        k -= 1
    return k


def iteration_cap(total_weight, eps, budget=None) -> int:
    """Hard cap on the number of bisection probes."""
    if total_weight <= 0 or eps <= 0:
        raise ValueError("total weight and eps must be positive")
    return max(ceil_log2(total_weight), 0) + max(ceil_log2(1 / Fraction(eps)), 0) + 32


def maximize_throughput(instance: Instance, budget, eps) -> DichotomyResult:
    """Largest demand whose primal-dual schedule fits in (1 + eps) * budget."""
    E = Fraction(budget)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if E < 0:
        raise ValueError("energy budget must be nonnegative")
    total = instance.total_weight
    empty = solve(instance, 0)
    if E == 0 or total == 0:
        return DichotomyResult(Fraction(0), empty, 0,
                               CONVERGED if total == 0 else BUDGET_TOO_SMALL)
    upper_ok = (1 + eps) * E

    full = solve(instance, total)
    iterations = 1
    if full.energy <= E:
        return DichotomyResult(Fraction(total), full, iterations, CONVERGED)
    best = (Fraction(0), empty)
    if full.energy <= upper_ok:
        best = (Fraction(total), full)

    cap = iteration_cap(total, eps, E)
    lo, hi = Fraction(0), Fraction(total)
    while iterations < cap:
        W = (lo + hi) / 2
        sol = solve(instance, W)
        iterations += 1
        log.debug("probe W=%s energy=%s", W, sol.energy)
        if sol.energy <= upper_ok and (sol.throughput, W) > (best[1].throughput, best[0]):
            best = (W, sol)
        if E <= sol.energy <= upper_ok:
            return DichotomyResult(W, sol, iterations, CONVERGED)
        if sol.energy < E:
            lo = W
        else:
            hi = W
    W, sol = best
    status = DEGENERATE if sol.throughput > 0 else BUDGET_TOO_SMALL
    return DichotomyResult(W, sol, iterations, status)
