"""LQR cost J = J1 + gamma J2 of consensus strategies.

J1 sums the expected squared disagreement, J2 the expected squared size of the
updates.  Exact values come from trace series; Monte Carlo checks them.
"""

import numpy as np

from kronsensus import (
    block_kron_strategy,
    cost_report,
    deadbeat_seed,
    j_closed_form_deadbeat,
    j_monte_carlo,
    j_riccati_unconstrained,
)
from kronsensus.lqr import j1_bounds, j1_upper_safe, j1_exact
from kronsensus.spectral import lazy_seed

for k in (2, 3, 4):
    s = block_kron_strategy(deadbeat_seed(3), k)
    r = cost_report(s, gamma=1.0)
    print(f"deadbeat N={s.size:3d}: J1={r.j1:.1f} J2={r.j2:.1f} J={r.j:.1f} "
          f"leading-order {j_closed_form_deadbeat(3, k, 1.0):.1f} "
          f"all-to-all optimum {j_riccati_unconstrained(s.size, 1.0):.1f}")

s = block_kron_strategy(deadbeat_seed(3), 2)
est = j_monte_carlo(s, 1.0, trials=20_000, seed=1)
print(f"\nMonte Carlo N=9, gamma=1: {est.estimate:.3f} +/- {est.std_error:.3f} (exact {cost_report(s, 1.0).j:.3f})")

a = lazy_seed(2)
for k in (1, 2, 3):
    lo, hi = j1_bounds(a, k)
    print(f"lazy seed k={k}: J1={j1_exact(block_kron_strategy(a, k)):.4f}  lower {lo:.4f}  "
          f"closed-form upper {hi:.4f}  safe upper {j1_upper_safe(a, k):.4f}")

# the averaging seed minimizes Tr(A^T A), which sets the leading cost coefficient
lazy = np.sum(lazy_seed(3) ** 2)
print("\nTr(A^T A): averaging seed", np.sum(deadbeat_seed(3) ** 2), " lazy seed", lazy)
