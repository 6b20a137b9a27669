from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speedsched.grids import (_speeds, build_delta, build_lambda, build_phi,
                              build_theta, total_volume)
from speedsched.model import Instance, Job, PowerModel, WrongSolverError


def test_theta_halves_a_single_window():
    inst = Instance.identical(1, [(0, 2, 1, 1), (0, 2, 1, 1)], 3)
    assert build_theta(inst) == [0, 1, 2]


def test_lambda_single_term():
    inst = Instance.identical(1, [(0, 1, 1, 1)], 3)
    assert build_lambda(inst) == [1]


def test_speeds_over_three_points():
    assert _speeds([F(0), F(1), F(3)], [2]) == [F(2, 3), 1, 2]


def test_phi_and_delta_for_knapsack_pair():
    inst = Instance.identical(1, [(0, 1, 1, 1), (1, 3, 1, 2)], 3)
    assert total_volume(inst) == 2
    assert build_phi(inst) == [0, F(1, 2), 1, F(3, 2), 2, 3]
    assert build_delta(inst) == [F(1, 3), F(1, 2), F(2, 3), 1, 2]


def test_unequal_volumes_rejected():
    inst = Instance.identical(1, [(0, 2, 1, 1), (0, 2, 2, 1)], 3)
    with pytest.raises(WrongSolverError):
        build_theta(inst)
    with pytest.raises(WrongSolverError):
        build_lambda(inst)


def test_phi_needs_identical_integer_volumes():
    unrelated = Instance(2, (Job(1, 0, 2, 1, (1, 2)),), PowerModel(3))
    with pytest.raises(WrongSolverError):
        build_phi(unrelated)
    halves = Instance.identical(1, [(0, 2, F(1, 2), 1)], 3)
    with pytest.raises(WrongSolverError):
        build_delta(halves)


windows = st.lists(
    st.tuples(st.integers(0, 5), st.integers(1, 4)).map(lambda t: (t[0], t[0] + t[1])),
    min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(windows, st.integers(1, 2))
def test_grid_contains_omega_and_stays_inside_it(ws, p):
    inst = Instance.identical(1, [(r, d, p, 1) for r, d in ws], 3)
    omega = set(inst.omega)
    for grid in (build_theta(inst), build_phi(inst)):
        assert omega <= set(grid)
        assert grid == sorted(set(grid))
        assert min(grid) == min(omega) and max(grid) == max(omega)
    for speeds in (build_lambda(inst), build_delta(inst)):
        assert all(s > 0 for s in speeds)
        assert speeds == sorted(set(speeds))


@settings(max_examples=40, deadline=None)
@given(windows)
def test_every_window_split_lands_on_theta(ws):
    inst = Instance.identical(1, [(r, d, 1, 1) for r, d in ws], 3)
    theta = set(build_theta(inst))
    omega = sorted(inst.omega)
    for a in omega:
        for b in omega:
            if a < b:
                for k in range(1, inst.n + 1):
                    assert all(a + l * F(b - a, k) in theta for l in range(k + 1))
