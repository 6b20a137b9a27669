import random

import pytest

from speedsched.model import Instance, Job, PowerModel


def worked_example(demand=None, budget=None):
    """Two unrelated machines, four unit-weight jobs, cubic power."""
    jobs = (
        Job(1, 0, 2, 1, (1, 2)),
        Job(2, 1, 3, 1, (3, 5)),
        Job(3, 0, 5, 1, (4, 3)),
        Job(4, 1, 3, 1, (2, 1)),
    )
    return Instance(2, jobs, PowerModel(3), demand, budget)


def random_unrelated(rng: random.Random, n_max=6, m_max=3, alphas=(2, 3),
                     horizon=6, max_p=4, max_w=3):
    n = rng.randint(1, n_max)
    m = rng.randint(1, m_max)
    jobs = []
    for k in range(n):
        r = rng.randint(0, horizon - 2)
        d = rng.randint(r + 1, horizon)
        vols = tuple(rng.randint(1, max_p) for _ in range(m))
        jobs.append(Job(k + 1, r, d, rng.randint(1, max_w), vols))
    return Instance(m, tuple(jobs), PowerModel(rng.choice(alphas)))


def random_equal(rng: random.Random, n_max=4, m_max=2, horizon=4, p_max=2, w_max=2):
    n = rng.randint(1, n_max)
    p = rng.randint(1, p_max)
    jobs = []
    for _ in range(n):
        r = rng.randint(0, horizon - 1)
        jobs.append((r, rng.randint(r + 1, horizon), p, rng.randint(1, w_max)))
    return Instance.identical(rng.randint(1, m_max), jobs, 3)


@pytest.fixture
def worked():
    return worked_example()
