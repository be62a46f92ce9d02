"""Essential spectral radius: closed forms against the eigensolver.

For a block Kronecker strategy the radius is the k-th root of the seed's; for
a Cayley strategy the eigenvalues are character sums of the generator.
"""

import math

import numpy as np

from kronsensus import block_kron_strategy, cayley_strategy, essential_spectral_radius, kron_ess_radius
from kronsensus.spectral import cayley_scaling, kron_trend, lazy_seed
from kronsensus.strategies import uniform_generator

a = np.array([[2 / 3, 1 / 3], [1 / 3, 2 / 3]])  # eigenvalues 1 and 1/3
for k in (1, 2, 3, 4):
    s = block_kron_strategy(a, k)
    closed = kron_ess_radius(a, k)
    numeric = essential_spectral_radius(s, method="numeric").ess_radius
    print(f"k={k}  N={s.size:3d}  closed {closed:.12f}  numeric {numeric:.12f}")

ring = cayley_strategy((81,), uniform_generator([-1, 0, 1]))
rep = essential_spectral_radius(ring)
print(f"\nZ_81 ring: {rep.ess_radius:.14f} via {rep.method.value}; "
      f"(1 + 2 cos(2 pi/81))/3 = {(1 + 2 * math.cos(2 * math.pi / 81)) / 3:.14f}")

print("\nring gap shrinks like 1/N^2, so (1 - rho) N stays bounded:")
for row in cayley_scaling([9, 27, 81, 243, 729]):
    print(f"  N={row['N']:4d}  rho={row['ess_radius']:.8f}  (1-rho)N={row['scaled_gap']:.5f}")

fit = kron_trend(lazy_seed(3))
print(f"\nKronecker gap against k: log-log slope {fit['slope']:.3f} (1/k law gives -1)")
