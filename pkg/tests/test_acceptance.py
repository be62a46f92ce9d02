"""Exit criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary (and by ``python tests/test_acceptance.py``).  Tolerances and
runtime limits are the pinned values of the criteria; nothing is relaxed to
make a line pass.
"""

from __future__ import annotations

import math
import sys
import time
from math import gcd
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import dense_costs, random_normal  # noqa: E402

from kronsensus.lqr import j1_bounds, j1_exact, j2_bounds, j2_exact, j_closed_form_deadbeat, j_monte_carlo
from kronsensus.matlin import block_kron, eigenvalues, kron_all, mat_pow, match_multisets
from kronsensus.sim import convergence_steps, read_trajectory_csv, replicate_figure, spread_ratio_ok
from kronsensus.spectral import (
    cayley_spectrum_dft,
    compare_families,
    essential_spectral_radius,
    kron_ess_radius,
    lazy_seed,
)
from kronsensus.strategies import (
    block_kron_strategy,
    cayley_matrix,
    cayley_strategy,
    deadbeat_seed,
    min_steps_bound,
    random_normal_seed,
    random_stochastic_seed,
    uniform_generator,
    validate_consensus,
)

RESULTS: dict[int, str] = {}


def record(number: int, title: str, ok: bool, elapsed: float, limit: float, detail: str) -> None:
    timing_ok = elapsed < limit
    status = "PASS" if ok and timing_ok else "FAIL"
    RESULTS[number] = (f"criterion {number} {status}: {title} | {detail} | "
                       f"{elapsed:.2f}s (limit {limit:g}s{'' if timing_ok else ', exceeded'})")
    print(RESULTS[number])
    assert ok, RESULTS[number]
    assert timing_ok, RESULTS[number]


# --- 1 ---------------------------------------------------------------------------------


def test_criterion_1_finite_time_consensus():
    start = time.perf_counter()
    s = block_kron_strategy(deadbeat_seed(3), 4)
    err = float(np.abs(mat_pow(s.matrix, 4) - np.full((81, 81), 1 / 81)).max())
    stats = convergence_steps(s, 100, threshold=1e-9 * 50, seed=2024)
    ok = err <= 1e-12 and all(st == 4 for st in stats.steps)
    record(1, "deadbeat n=3 k=4 reaches consensus in 4 steps", ok, time.perf_counter() - start, 1.0,
           f"||M^4 - E||inf = {err:.2e}, steps over 100 trials: min {stats.min} max {stats.max}")


# --- 2 ---------------------------------------------------------------------------------


def _nonnegative_strategies():
    rng = np.random.default_rng(7)
    out = [block_kron_strategy(deadbeat_seed(n), k) for n, k in [(2, 2), (2, 3), (2, 5), (3, 2), (3, 4), (4, 2)]]
    out += [block_kron_strategy(lazy_seed(n), k) for n, k in [(2, 3), (3, 3)]]
    out += [cayley_strategy((N,), uniform_generator([-1, 0, 1])) for N in (5, 9, 27, 81)]
    out.append(cayley_strategy((3, 3), uniform_generator([(0, 0), (1, 0), (0, 1)])))
    out.append(cayley_strategy((4, 4), uniform_generator([(0, 0), (1, 0), (0, 1)])))
    while len(out) < 24:
        a = random_stochastic_seed(int(rng.integers(2, 4)), rng)
        if validate_consensus(a).solves_consensus:
            out.append(block_kron_strategy(a, int(rng.integers(2, 4))))
    return out


def test_criterion_2_optimal_speed_bound():
    start = time.perf_counter()
    checked = violations = 0
    for s in _nonnegative_strategies():
        m = np.asarray(s.matrix)
        assert np.all(m >= 0)
        p = np.eye(s.size)
        for k in range(1, 2 * s.size + 1):
            p = p @ m
            if np.all(p > 0):
                checked += 1
                violations += s.nu**k < s.size
                break
    bound = min_steps_bound(81, 3)
    ok = violations == 0 and checked > 0 and bound == 4
    record(2, "nu^k >= N whenever M^k > 0", ok, time.perf_counter() - start, 1.0,
           f"{checked} strategies with a positive power, {violations} violations, min_steps_bound(81,3) = {bound}")


# --- 3 ---------------------------------------------------------------------------------


def test_criterion_3_kronecker_spectral_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(33)
    worst, cases = 0.0, 0
    for i in range(24):
        n, k = (2, 3)[i % 2], (2, 3, 4)[(i // 2) % 3]
        a = random_normal_seed(n, rng, kind="circulant" if i % 4 == 3 else "symmetric")
        numeric = essential_spectral_radius(block_kron_strategy(a, k).matrix, method="numeric").ess_radius
        closed = essential_spectral_radius(a, method="numeric").ess_radius ** (1 / k)
        worst = max(worst, abs(numeric - closed), abs(numeric - kron_ess_radius(a, k)))
        cases += 1
    record(3, "rho(M) = rho(A)^(1/k)", worst <= 1e-7 and cases >= 20, time.perf_counter() - start, 30.0,
           f"{cases} random normal seeds, max |difference| = {worst:.2e} (tol 1e-7)")


# --- 4 ---------------------------------------------------------------------------------


def _kron_power(blocks):
    return kron_all(blocks) if blocks else np.ones((1, 1))


def test_criterion_4_power_and_trace_identities():
    start = time.perf_counter()
    rng = np.random.default_rng(44)
    counts = {"powers": 0, "gram": 0, "rotated trace": 0, "cross trace": 0}
    worst_entry = worst_trace = 0.0
    while sum(counts.values()) < 240:
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, 4))
        a = rng.standard_normal((n, n)) / n
        m = block_kron(np.eye(n ** (k - 1)), a, n)
        for t in range(0, 3 * k + 1):
            r, s = divmod(t, k)
            ar, ar1 = np.linalg.matrix_power(a, r), np.linalg.matrix_power(a, r + 1)
            lhs = mat_pow(m, t)
            rhs = block_kron(_kron_power([ar] * (k - s)), _kron_power([ar1] * s), n)
            scale = max(1.0, float(np.abs(lhs).max()))
            worst_entry = max(worst_entry, float(np.abs(lhs - rhs).max()) / scale)
            counts["powers"] += 1
            gram = lhs.T @ lhs
            rhs = _kron_power([ar.T @ ar] * (k - s) + [ar1.T @ ar1] * s)
            worst_entry = max(worst_entry, float(np.abs(gram - rhs).max()) / max(1.0, float(np.abs(gram).max())))
            counts["gram"] += 1
        for l in range(1, k + 1):
            if gcd(l, k) != 1:
                continue
            bs = [rng.standard_normal((n, n)) / n for _ in range(k)]
            lhs = np.trace(block_kron(_kron_power(bs[:l]), _kron_power(bs[l:]), n))
            prod = np.eye(n)
            for j in range(k):
                prod = prod @ bs[(j * l) % k]
            worst_trace = max(worst_trace, abs(lhs - np.trace(prod)) / max(1.0, abs(lhs)))
            counts["rotated trace"] += 1
        an = random_normal(n, rng)
        mn = block_kron(np.eye(n ** (k - 1)), an, n)
        for t in range(0, 3 * k + 1):
            lhs = np.trace(mat_pow(mn, t).T @ mat_pow(mn, t + 1))
            rhs = np.trace(np.linalg.matrix_power(an.T, t) @ np.linalg.matrix_power(an, t + 1))
            worst_trace = max(worst_trace, abs(lhs - rhs) / max(1.0, abs(lhs)))
            counts["cross trace"] += 1
    ok = worst_entry <= 1e-9 and worst_trace <= 1e-8 and sum(counts.values()) >= 200
    record(4, "power, Gram and trace identities", ok, time.perf_counter() - start, 60.0,
           f"cases {counts}, max entry error {worst_entry:.1e} (tol 1e-9), max trace error {worst_trace:.1e} (tol 1e-8)")


# --- 5 ---------------------------------------------------------------------------------


def test_criterion_5_cost_sandwich():
    start = time.perf_counter()
    rng = np.random.default_rng(55)
    slack = 1e-6
    fails = {"J1 lower": 0, "J1 upper": 0, "J2 lower": 0, "J2 upper": 0}
    worst = {}
    cases = 0
    for i in range(24):
        n = (2, 3)[i % 2]
        k = (1, 2, 3, 4)[(i // 2) % 4]
        if n**k > 81:
            k = 3
        a = random_normal_seed(n, rng)
        s = block_kron_strategy(a, k)
        j1, j2 = j1_exact(s), j2_exact(s)
        lo, hi = j1_bounds(a, k)
        l2, h2 = j2_bounds(a, k, j1)
        checks = {"J1 lower": (lo, j1), "J1 upper": (j1, hi), "J2 lower": (l2, j2), "J2 upper": (j2, h2)}
        for name, (small, big) in checks.items():
            if small > big + slack * max(1.0, abs(big)):
                fails[name] += 1
                worst[name] = max(worst.get(name, 0.0), small - big)
        cases += 1
    ok = cases >= 20 and not any(fails.values())
    record(5, "J1 and J2 bound sandwich for normal seeds", ok, time.perf_counter() - start, 60.0,
           f"{cases} seeds, violations {fails}, largest excess {({k: round(v, 4) for k, v in worst.items()})}")


# --- 6 ---------------------------------------------------------------------------------


def test_criterion_6_deadbeat_costs():
    start = time.perf_counter()
    problems = []
    for n, k, want1, want2, horizon in [(3, 2, 10.0, 11.0, 6), (3, 4, 116.0, 151.0, 10)]:
        s = block_kron_strategy(deadbeat_seed(n), k)
        o1, o2 = dense_costs(s.matrix, horizon)  # brute-force oracle
        j1, j2 = j1_exact(s), j2_exact(s)
        if abs(j1 - want1) > 1e-9 or abs(o1 - want1) > 1e-9:
            problems.append(f"N={n**k}: J1 {j1:g} (oracle {o1:g}) != {want1:g}")
        if abs(j2 - want2) > 1e-9 or abs(o2 - want2) > 1e-9:
            problems.append(f"N={n**k}: J2 {j2:g} (oracle {o2:g}) != {want2:g}")
        for gamma in (0.0, 1.0):
            gap = abs(j_closed_form_deadbeat(n, k, gamma) - (j1 + gamma * j2))
            if gap > (1 + 2 * gamma) * k:
                problems.append(f"N={n**k} gamma={gamma:g}: closed-form gap {gap:g} > {(1 + 2 * gamma) * k:g}")
    record(6, "deadbeat exact costs", not problems, time.perf_counter() - start, 5.0,
           "; ".join(problems) if problems else "J1, J2 and closed-form slack as stated")


# --- 7 ---------------------------------------------------------------------------------


def test_criterion_7_monte_carlo_consistency():
    start = time.perf_counter()
    s = block_kron_strategy(deadbeat_seed(3), 2)
    hits = {}
    for gamma in (0.0, 1.0):
        exact = j1_exact(s) + gamma * j2_exact(s)
        inside = 0
        for rep in range(100):
            est = j_monte_carlo(s, gamma, 10_000, seed=rep)
            inside += abs(est.estimate - exact) <= 4 * est.std_error
        hits[gamma] = inside
    ok = all(v >= 99 for v in hits.values())
    record(7, "Monte Carlo within 4 SE of the exact cost", ok, time.perf_counter() - start, 60.0,
           f"repetitions inside 4 SE out of 100: gamma=0 -> {hits[0.0]}, gamma=1 -> {hits[1.0]}")


# --- 8 ---------------------------------------------------------------------------------


def test_criterion_8_cayley_spectrum():
    start = time.perf_counter()
    worst = 0.0
    cases = [((N,), uniform_generator([-1, 0, 1])) for N in (5, 9, 27, 81)]
    cases.append(((3, 3), uniform_generator([(0, 0), (1, 0), (0, 1)])))
    for dims, pi in cases:
        dft = cayley_spectrum_dft(dims, pi).eigenvalues
        numeric = eigenvalues(cayley_matrix(dims, pi)).eigenvalues
        worst = max(worst, match_multisets(dft, numeric))
    rho = essential_spectral_radius(cayley_strategy((81,), uniform_generator([-1, 0, 1]))).ess_radius
    err = abs(rho - (1 + 2 * math.cos(2 * math.pi / 81)) / 3)
    ok = worst <= 1e-7 and err <= 1e-10
    record(8, "character sums match the eigensolver", ok, time.perf_counter() - start, 10.0,
           f"max multiset distance {worst:.1e} (tol 1e-7), Z_81 rho error {err:.1e} (tol 1e-10)")


# --- 9 ---------------------------------------------------------------------------------


def test_criterion_9_family_comparison(tmp_path):
    start = time.perf_counter()
    rows = compare_families(3, [2, 3, 4])
    ordered = True
    for N in (9, 27, 81):
        dead = [r for r in rows if r.N == N and r.family == "kronecker-deadbeat"][0]
        cay = [r for r in rows if r.N == N and r.family == "cayley"][0]
        ordered &= dead.ess_radius == 0.0 and dead.ess_radius < cay.ess_radius
    kpath, cpath = replicate_figure(9, tmp_path)
    ratio = spread_ratio_ok(read_trajectory_csv(kpath), read_trajectory_csv(cpath))
    record(9, "Kronecker beats Cayley at matched in-degree", ordered and ratio, time.perf_counter() - start, 10.0,
           f"deadbeat rho = 0 < Cayley rho for N in 9, 27, 81: {ordered}; figure spread ratio >= 1e3: {ratio}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
