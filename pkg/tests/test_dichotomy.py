import random
from fractions import Fraction as F

import pytest

from conftest import worked_example, random_unrelated
from speedsched.dichotomy import (BUDGET_TOO_SMALL, CONVERGED, ceil_log2,
                                  iteration_cap, maximize_throughput)
from speedsched.model import Instance, validate_plan
from speedsched.oracle import opt_preemptive_throughput
from speedsched.primal_dual import solve


def test_ceil_log2():
    assert [ceil_log2(x) for x in (1, 2, 3, 4, 5, 1024, 1025)] == [0, 1, 2, 2, 3, 10, 11]
    assert ceil_log2(F(1, 4)) == -2
    assert ceil_log2(F(1, 3)) == -1
    with pytest.raises(ValueError):
        ceil_log2(0)


def test_iteration_cap():
    assert iteration_cap(8, F(1, 4)) == 37
    assert iteration_cap(1, 1) == 32
    assert iteration_cap(1024, F(1, 1024)) == 52
    with pytest.raises(ValueError):
        iteration_cap(0, F(1, 2))


def test_zero_budget():
    res = maximize_throughput(worked_example(), 0, F(1, 100))
    assert res.status == BUDGET_TOO_SMALL
    assert res.demand == 0 and res.throughput == 0 and res.energy == 0


def test_worked_budget():
    inst = worked_example()
    E, eps = F(281, 100), F(1, 100)
    res = maximize_throughput(inst, E, eps)
    assert res.status == CONVERGED
    assert res.throughput >= 3
    assert E <= res.energy <= (1 + eps) * E
    assert res.iterations <= iteration_cap(inst.total_weight, eps)
    assert validate_plan(inst, res.solution.plan).ok


def test_everything_fits():
    inst = worked_example()
    res = maximize_throughput(inst, 10**6, F(1, 10))
    assert res.status == CONVERGED and res.throughput == 4 and res.iterations == 1


def test_single_job_too_expensive():
    inst = Instance.identical(1, [(0, 1, 1, 1)], 3)
    res = maximize_throughput(inst, F(1, 2), F(1, 100))
    assert res.status == BUDGET_TOO_SMALL and res.throughput == 0
    assert res.iterations <= iteration_cap(1, F(1, 100))


def test_bad_arguments():
    with pytest.raises(ValueError):
        maximize_throughput(worked_example(), -1, F(1, 10))
    with pytest.raises(ValueError):
        maximize_throughput(worked_example(), 1, 0)


def test_budget_and_cap_respected_on_random_instances():
    rng = random.Random(5)
    eps = F(1, 20)
    for _ in range(40):
        inst = random_unrelated(rng, n_max=4, m_max=2)
        full = solve(inst, inst.total_weight).energy
        E = full * F(rng.randint(1, 9), 10)
        res = maximize_throughput(inst, E, eps)
        assert res.energy <= (1 + eps) * E
        assert res.iterations <= iteration_cap(inst.total_weight, eps)
        assert 0 <= res.demand <= inst.total_weight
        assert res.throughput >= res.demand
        assert validate_plan(inst, res.solution.plan).ok
        alpha = inst.power.alpha
        assert opt_preemptive_throughput(inst, E) <= (2 * alpha + 2) * res.throughput
