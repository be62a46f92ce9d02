"""Build a block Kronecker strategy and a Cayley strategy, then check them.

Both give 81 agents an in-degree of 3.  The Kronecker matrix is grown from the
3x3 averaging seed; the Cayley matrix averages each agent with its two ring
neighbours.
"""

import numpy as np

from kronsensus import (
    block_kron_strategy,
    cayley_strategy,
    de_bruijn_graph,
    deadbeat_seed,
    degree_profile,
    min_steps_bound,
    validate_consensus,
)
from kronsensus.strategies import uniform_generator

kron = block_kron_strategy(deadbeat_seed(3), 4)
ring = cayley_strategy((81,), uniform_generator([-1, 0, 1]))

for name, s in (("kronecker", kron), ("cayley", ring)):
    r = s.report
    print(f"{name:10s} N={s.size} nu={s.nu} rows/cols sum to 1: {r.row_sums_ok}/{r.col_sums_ok} "
          f"simple 1: {r.one_simple} stable: {r.spectrum_stable}")

# agent i listens to agents 3i, 3i+1, 3i+2 (mod 81): the de Bruijn pattern
print("listening graph is de Bruijn:", kron.comm_graph.reversed() == de_bruijn_graph(3, 4))
print("in-degrees:", set(degree_profile(kron.comm_graph).in_degrees))

# no strategy with in-degree 3 can mix 81 agents in fewer than 4 steps
print("lower bound on steps:", min_steps_bound(81, 3))

# the identity keeps everyone where they are: 1 is not a simple eigenvalue
print("identity passes:", validate_consensus(np.eye(4)).ok, validate_consensus(np.eye(4)).failures())
