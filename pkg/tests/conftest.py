import os

import numpy as np

from staffing_minimax.model import make_instance, validate_instance

INSTANCE_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "instances")


def fig3_instance(which: str):
    """The three illustration instances: T=10, c=C=1, rho_t = 1-0.8^(T-t+1),
    demand range [0,1]; (a)/(b) use Delta_t = 1-0.5^(T-t) with s=4 / s=0.6,
    (c) uses an uninformative schedule with a sharp last day and s=2."""
    T = 10
    rho = [1 - 0.8 ** (T - t + 1) for t in range(1, T + 1)]
    informative = [1 - 0.5 ** (T - t) for t in range(1, T + 1)]
    flat = [1.0] * (T - 1) + [0.3]
    s, deltas = {"a": (4.0, informative), "b": (0.6, informative),
                 "c": (2.0, flat)}[which]
    return validate_instance(make_instance([s], [rho], (0, 1), deltas))


def instance_path(name: str) -> str:
    return os.path.join(INSTANCE_DIR, name)


def random_single_pool(rng: np.random.Generator):
    """Random single-pool instance with monotone error bounds (eps = 0)."""
    T = int(rng.integers(1, 11))
    rho = np.sort(rng.uniform(0.05, 1.0, size=T))[::-1]
    hi0 = rng.uniform(0.5, 3.0)
    deltas = np.sort(rng.uniform(0.0, hi0, size=T))[::-1]
    s = rng.uniform(0.1, 3.0)
    c = rng.uniform(0.2, 3.0)
    C = rng.uniform(0.2, 3.0)
    return validate_instance(make_instance(
        [s], [rho], (0.0, hi0), deltas, under_cost=c, over_cost=C))


def random_multi_pool(rng: np.random.Generator, n_max=3, t_max=6):
    n = int(rng.integers(1, n_max + 1))
    T = int(rng.integers(1, t_max + 1))
    rho = np.sort(rng.uniform(0.05, 1.0, size=(n, T)), axis=1)[:, ::-1]
    lo0 = rng.uniform(0.0, 0.5)
    hi0 = lo0 + rng.uniform(0.2, 2.0)
    deltas = rng.uniform(0.0, (hi0 - lo0) * 1.2, size=T)
    eps = (rng.uniform(0.0, 0.1, size=T)
           if rng.uniform() < 0.3 else np.zeros(T))
    s = rng.uniform(0.1, 2.5, size=n)
    return validate_instance(make_instance(
        s, rho, (lo0, hi0), deltas, inconsistency=eps,
        under_cost=rng.uniform(0.2, 3.0), over_cost=rng.uniform(0.2, 3.0)))
