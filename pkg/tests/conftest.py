"""Independent oracles shared by the test modules.

Everything here is written from definitions with plain loops so it does not
share code paths with the library.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np
import pytest


def kron_by_definition(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    (p, q), (r, s) = a.shape, b.shape
    out = np.zeros((p * r, q * s))
    for i, j, k, l in itertools.product(range(p), range(q), range(r), range(s)):
        out[i * r + k, j * s + l] = a[i, j] * b[k, l]
    return out


def digits_by_hand(value, base, width):
    out = []
    for _ in range(width):
        value, d = divmod(value, base)
        out.append(d)
    return out[::-1]


def undigits(ds, base):
    v = 0
    for d in ds:
        v = v * base + d
    return v


def block_kron_by_definition(b, c, n):
    """``(B ⊙ C)_{p,q} = (B ⊗ C)_{σ^t(p), q}`` with ``σ`` the left digit rotation
    and ``n^t`` the size of ``C``."""
    full = kron_by_definition(b, c)
    t = round(np.log(np.asarray(c).shape[0]) / np.log(n))
    width = round(np.log(full.shape[0]) / np.log(n))
    out = np.empty_like(full)
    for p in range(full.shape[0]):
        ds = digits_by_hand(p, n, width)
        rot = ds[t % width:] + ds[: t % width] if width else ds
        out[p] = full[undigits(rot, n)]
    return out


def m_by_definition(a, k):
    """Stack of ``I_{n^(k-1)} ⊗ a_i`` over the rows ``a_i`` of the seed."""
    a = np.asarray(a, float)
    n = a.shape[0]
    eye = np.eye(n ** (k - 1))
    return np.vstack([kron_by_definition(eye, a[i : i + 1, :]) for i in range(n)])


def dense_costs(m, terms):
    """``(Σ ||M^t - E||_F², Σ ||M^(t+1) - M^t||_F²)`` over ``t < terms``."""
    m = np.asarray(m, float)
    size = m.shape[0]
    e = np.full((size, size), 1.0 / size)
    p = np.eye(size)
    j1 = j2 = 0.0
    for _ in range(terms):
        nxt = m @ p
        j1 += float(np.sum((p - e) ** 2))
        j2 += float(np.sum((nxt - p) ** 2))
        p = nxt
    return j1, j2


def reachable(adj, start):
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if v not in seen:
                seen.add(int(v))
                queue.append(int(v))
    return seen


def strongly_connected_by_bfs(adj):
    size = adj.shape[0]
    return all(len(reachable(adj, s)) == size for s in range(size))


def random_normal(n, rng, radius=0.9):
    """Symmetric doubly stochastic seed ``E + U diag(μ) Uᵀ`` with ``U ⊥ 1``."""
    ones = np.ones((n, 1)) / np.sqrt(n)
    q, _ = np.linalg.qr(np.hstack([ones, rng.standard_normal((n, n - 1))]))
    u = q[:, 1:]
    mu = rng.uniform(-radius, radius, n - 1)
    return np.full((n, n), 1.0 / n) + (u * mu) @ u.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
