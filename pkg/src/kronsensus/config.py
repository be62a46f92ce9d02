"""Dimension caps and numeric tolerances.

The caps are module-level settings rather than constants baked into the
algorithms; tests and callers may rebind them, e.g.::

    from kronsensus import config
    config.caps = config.Caps(max_eig_dim=4096)
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Caps:
    max_product_entries: int = 2**20
    max_eig_dim: int = 2048
    max_series_terms: int = 10**6
    max_dense_trajectory: int = 10**7


caps = Caps()

# matrix identities: EPS_CMP * max(1, ||.||_inf)
EPS_CMP = 1e-9
# eigenvalue multiset matching and clustering around 1
EPS_EIG = 1e-7
# condition (C): |lambda| < 1 - EPS_STABLE
EPS_STABLE = 1e-9
# "nonzero" entries in communication graphs and degree counts
ZERO_TOL = 1e-12
