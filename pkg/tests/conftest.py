import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from coincidence.core import new_marginal


def random_margin(rng, n):
    w = rng.dirichlet(np.ones(n))
    while (w <= 0).any():
        w = rng.dirichlet(np.ones(n))
    return new_marginal(w)


def random_pair(rng, lo=2, hi=8):
    p, q = (int(x) for x in rng.integers(lo, hi + 1, size=2))
    return random_margin(rng, p), random_margin(rng, q)


@st.composite
def margins(draw, min_size=1, max_size=8):
    n = draw(st.integers(min_size, max_size))
    raw = draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n))
    w = np.asarray(raw) / np.sum(raw)
    return new_marginal(w)


def brute_force_optimum(mu_w, nu_w):
    """Minimum of sum(pi**2) by enumerating every zero pattern.

    For each pattern, the equality-constrained problem is solved through its
    KKT linear system; the best nonnegative candidate wins.  Exponential in
    ``p * q``: keep grids at 9 cells or fewer.
    """
    mu_w = np.asarray(mu_w, dtype=float)
    nu_w = np.asarray(nu_w, dtype=float)
    p, q = len(mu_w), len(nu_w)
    cells = p * q
    a_rows = np.zeros((p + q, cells))
    for u in range(p):
        a_rows[u, u * q:(u + 1) * q] = 1
    for v in range(q):
        a_rows[p + v, v::q] = 1
    b = np.concatenate([mu_w, nu_w])
    best, best_val = None, np.inf
    for pattern in itertools.product((False, True), repeat=cells):
        free = np.array([not z for z in pattern])
        if not free.any():
            continue
        a = a_rows[:, free]
        # minimize |x|^2 s.t. a x = b  ->  x = a^T y with a a^T y = b
        y, *_ = np.linalg.lstsq(a @ a.T, b, rcond=None)
        x = a.T @ y
        if np.abs(a @ x - b).max() > 1e-10 or x.min() < -1e-12:
            continue
        val = float(x @ x)
        if val < best_val - 1e-15:
            full = np.zeros(cells)
            full[free] = x
            best, best_val = full.reshape(p, q), val
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
