"""Kronecker against Cayley at matched in-degree, for N = 3^k agents."""

from kronsensus import compare_families
from kronsensus.spectral import comparison_csv

rows = compare_families(3, [2, 3, 4, 5], gamma=0.0)
print(f"{'family':20s} {'N':>4s} {'rho':>12s} {'J (gamma=0)':>12s}")
for r in rows:
    j = "" if r.j is None else f"{r.j:12.2f}"
    print(f"{r.family:20s} {r.N:4d} {r.ess_radius:12.8f} {j:>12s}")

print("\nCSV:\n" + comparison_csv(rows))
