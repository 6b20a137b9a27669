import math
import random
from fractions import Fraction as F

import pytest

from speedsched.dp_agreeable import AgreeableDP, solve_agreeable
from speedsched.grids import build_phi
from speedsched.io import gen_agreeable, knapsack_instance
from speedsched.model import (Instance, Job, PowerModel, WrongSolverError,
                              energy_of, validate_plan)
from speedsched.oracle import opt_nonpreemptive


def one_job():
    return Instance.identical(1, [(0, 2, 1, 1)], 3)


def test_base_row():
    dp = AgreeableDP(one_job())
    assert dp.fk(0, (3,)) == [0, math.inf]


def test_single_job_value():
    dp = AgreeableDP(one_job())
    top = (dp.index[F(2)],)
    assert dp.fk(1, top) == [0, F(1, 4)]
    res = solve_agreeable(one_job(), F(1, 4))
    assert res.weight == 1 and res.energy == F(1, 4)
    (sl,), = res.plan.machines
    assert (sl.start, sl.end, sl.speed) == (0, 2, F(1, 2))
    assert solve_agreeable(one_job(), F(1, 5)).weight == 0


def test_start_times_follow_the_earlier_bound():
    inst = Instance.identical(2, [(0, 3, 2, 1), (1, 5, 1, 1)], 3)
    dp = AgreeableDP(inst)
    i1, i3, i5 = (dp.index[F(t)] for t in (1, 3, 5))
    assert (i1, 1, 2) in dp.starts(1, i3)
    # job 2 ending at 3 cannot start before its release at 1
    assert min(dp.phi[a] for a, _, _ in dp.starts(2, i3)) == 1
    # both machines look the same to job 1 once clamped to its deadline
    assert dp.clamp(1, (i5, i3)) == (i3, i3)


def test_knapsack_pair():
    inst = knapsack_instance([(1, 1), (2, 2)], F(9, 8))
    res = solve_agreeable(inst)
    assert res.weight == 2 and res.energy == F(1, 4)
    res = solve_agreeable(inst, F(5, 4))
    assert res.weight == 3 and res.energy == F(5, 4)


def test_errors():
    with pytest.raises(ValueError):
        solve_agreeable(one_job(), -1)
    with pytest.raises(WrongSolverError):
        solve_agreeable(Instance.identical(1, [(0, 4, 1, 1), (1, 3, 1, 1)], 3), 1)
    with pytest.raises(WrongSolverError):
        solve_agreeable(Instance.identical(4, [(0, 2, 1, 1)], 3), 1)
    with pytest.raises(WrongSolverError):
        solve_agreeable(Instance(2, (Job(1, 0, 2, 1, (1, 2)),), PowerModel(3)), 1)


def test_empty_instance():
    res = solve_agreeable(Instance.identical(1, [], 3), 1)
    assert res.weight == 0 and res.plan.jobs() == set()


def test_recursion_monotone():
    for seed in range(6):
        inst = gen_agreeable(seed, n=3, machines=2, horizon=4, max_p=2, max_w=2)
        dp = AgreeableDP(inst)
        pts = range(len(dp.phi))
        for k in range(1, inst.n + 1):
            for x in pts:
                for y in pts:
                    if y < x:
                        continue
                    v, prev = dp.fk(k, (x, y)), dp.fk(k - 1, (x, y))
                    assert all(a <= b for a, b in zip(v, prev))
                    assert all(a <= b for a, b in zip(v, v[1:]))


def test_bound_growth_can_raise_the_value():
    # the job must end exactly at the bound, and a 2-long run needs speed
    # 1/2, which is not in the speed set {1/3, 2/3, 1, 4/3}
    inst = Instance.identical(1, [(0, 3, 1, 2), (0, 3, 2, 1), (0, 3, 1, 1)], 3)
    dp = AgreeableDP(inst)
    assert dp.delta == [F(1, 3), F(2, 3), 1, F(4, 3)]
    assert dp.fk(1, (dp.index[F(3, 2)],))[1] == F(4, 9)
    assert dp.fk(1, (dp.index[F(2)],))[1] == 1
    assert solve_agreeable(inst, F(1, 9)).weight == 2


def test_matches_grid_oracle_and_plans_are_edf():
    rng = random.Random(8)
    for seed in range(20):
        inst = gen_agreeable(seed, n=rng.randint(1, 4), machines=rng.randint(1, 2),
                             horizon=4, max_p=2, max_w=3)
        grid = build_phi(inst)
        position = {j.id: x for x, j in enumerate(inst.jobs)}
        dp = AgreeableDP(inst)
        for E in (F(1, 2), 1, 3, 8):
            res = dp.best_within(E)
            assert res.weight == opt_nonpreemptive(inst, E, grid)
            assert validate_plan(inst, res.plan).ok
            assert energy_of(res.plan, inst.power) == res.energy <= E
            for row in res.plan.machines:
                order = [position[sl.job] for sl in sorted(row, key=lambda s: s.start)]
                assert order == sorted(order)
                assert all(sl.start in grid and sl.end in grid for sl in row)
