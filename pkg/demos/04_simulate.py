"""Run both 81-agent strategies from the same random start.

The Kronecker strategy reaches exact agreement after 4 steps; the ring needs
on the order of a thousand.  CSV files for plotting go to ./figure.
"""

from kronsensus import convergence_steps, replicate_figure
from kronsensus.sim import figure_strategies, read_trajectory_csv, spread

kron, ring = figure_strategies()
kpath, cpath = replicate_figure(seed=0, out_dir="figure")
k, c = read_trajectory_csv(kpath), read_trajectory_csv(cpath)
print(" t   kronecker spread   cayley spread")
for t in (0, 1, 2, 3, 4, 10, 30):
    print(f"{t:2d}   {spread(k)[t]:16.3e}   {spread(c)[t]:13.3f}")

print("\nsteps to |x - mean| <= 5e-8 over 50 random starts:")
print("  kronecker", convergence_steps(kron, 50, seed=1).to_dict())
print("  cayley   ", convergence_steps(ring, 50, seed=1, t_max=20_000).to_dict())
