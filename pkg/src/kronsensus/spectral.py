"""Essential spectral radius, closed-form spectra for block Kronecker and
Cayley strategies, and the Kronecker-versus-Cayley comparison.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from . import config
from .errors import DomainError, SizeError
from .groups import AbelianGroup
from .matlin import Spectrum, as_matrix, eigenvalues, rotation_permutation
from .strategies import (
    Family,
    Strategy,
    block_kron_strategy,
    canonical_generator,
    cayley_matrix,
    cayley_strategy,
    deadbeat_seed,
    uniform_generator,
    validate_consensus,
)


SNAP_TOL = 1e-12


class Method(str, enum.Enum):
    KRONECKER_CLOSED_FORM = "KroneckerClosedForm"
    CIRCULANT_DFT = "CirculantDFT"
    NUMERIC_QR = "NumericQR"


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    ess_radius: float
    method: Method
    dim_ker_flag: bool


def ess_radius_from_eigenvalues(lam) -> tuple[float, bool]:
    """``(rho, dim_ker_flag)``: rho is 1 when 1 is a repeated eigenvalue,
    otherwise the largest modulus after removing one copy of 1."""
    lam = np.asarray(lam, dtype=complex)
    dist = np.abs(lam - 1.0)
    if np.count_nonzero(dist <= config.EPS_EIG) > 1:
        return 1.0, True
    rest = np.delete(lam, int(np.argmin(dist))) if lam.size and dist.min() <= config.EPS_EIG else lam
    return (float(np.abs(rest).max()) if rest.size else 0.0), False


def seed_eigenvalues(a) -> np.ndarray:
    """Eigenvalues of a seed with round-off sized moduli (``<= 1e-12 ||a||``) set to 0.

    Taking ``k``-th roots would otherwise turn ``1e-17`` into ``1e-4``.
    """
    a = as_matrix(a, square=True, name="seed")
    lam = np.linalg.eigvals(a).astype(complex)
    lam[np.abs(lam) <= SNAP_TOL * max(1.0, float(np.abs(a).sum(axis=1).max()))] = 0.0
    return lam


def kron_spectrum(a, k: int) -> np.ndarray:
    """Eigenvalues of the block Kronecker matrix of seed ``a`` without forming it.

    The matrix permutes base-n digit strings cyclically.  Each rotation orbit
    of period ``c`` with leading digits ``j_1..j_c`` contributes the ``c``
    complex ``c``-th roots of ``λ_{j_1} ... λ_{j_c}``, where ``λ`` are the
    eigenvalues of ``a``.
    """
    a = as_matrix(a, square=True, name="seed")
    n = a.shape[0]
    size = n**k
    if size > config.caps.max_product_entries:
        raise SizeError(f"spectrum of dimension {size} exceeds the cap")
    lam = seed_eigenvalues(a)
    p = np.arange(size, dtype=np.int64)
    rot1 = rotation_permutation(n, k, 1 % k)
    smallest = p.copy()
    period = np.full(size, k, dtype=np.int64)
    q = p
    for c in range(1, k):
        q = rot1[q]
        smallest = np.minimum(smallest, q)
        period = np.where((q == p) & (period == k), np.minimum(period, c), period)
    reps = np.nonzero(smallest == p)[0]
    out = []
    digits = np.stack([(reps // n ** (k - 1 - i)) % n for i in range(k)], axis=1)
    for rep_digits, c in zip(digits, period[reps]):
        w = np.prod(lam[rep_digits[:c]])
        root = abs(w) ** (1.0 / c)
        phase = np.angle(w)
        out.extend(root * np.exp(1j * (phase + 2 * np.pi * np.arange(c)) / c))
    return np.asarray(out, dtype=complex)


def cayley_spectrum_dft(group_dims, pi: Mapping) -> Spectrum:
    """Eigenvalues ``λ_h = Σ_s π(s) exp(-2πi <s, h>)`` of the Cayley matrix of ``pi``.

    ``λ_h`` belongs to eigenvector ``v_h(g) = exp(2πi <g, h>)``; the
    eigenvalues are listed in group-element order of ``h``.  The residual is
    evaluated on those character vectors when the group is small enough to
    build the matrix.
    """
    group = group_dims if isinstance(group_dims, AbelianGroup) else AbelianGroup(group_dims)
    gen = canonical_generator(group, pi)
    dims = np.array(group.dims, dtype=float)
    h = np.array(group.elements(), dtype=float).reshape(group.order, len(group.dims))
    lam = np.zeros(group.order, dtype=complex)
    for s, w in gen.items():
        lam += w * np.exp(-2j * np.pi * (h @ (np.array(s) / dims)))

    residual = float("nan")
    if group.order <= config.caps.max_eig_dim:
        p = cayley_matrix(group, gen)
        v = np.exp(2j * np.pi * (h / dims) @ h.T) / math.sqrt(group.order)
        residual = float(np.max(np.linalg.norm(p @ v - v * lam, axis=0)))
    return Spectrum(lam, residual)


def essential_spectral_radius(m, *, method: str = "auto") -> SpectrumReport:
    """Essential spectral radius of a matrix or strategy.

    With ``method="auto"`` a block Kronecker strategy uses its seed's spectrum,
    a Cayley strategy uses character sums and anything else an eigensolve.
    ``method="numeric"`` forces the eigensolve.
    """
    if method not in ("auto", "numeric"):
        raise DomainError(f"unknown method {method!r}")
    if isinstance(m, Strategy) and method == "auto":
        if m.family is Family.BLOCK_KRONECKER:
            lam = kron_spectrum(m.seed, m.k)
            rho_a, flag = ess_radius_from_eigenvalues(seed_eigenvalues(m.seed))
            rho = 1.0 if flag else rho_a ** (1.0 / m.k)
            return SpectrumReport(lam, rho, Method.KRONECKER_CLOSED_FORM, flag)
        if m.family is Family.CAYLEY:
            lam = cayley_spectrum_dft(m.group, m.generator).eigenvalues
            rho, flag = ess_radius_from_eigenvalues(lam)
            return SpectrumReport(lam, rho, Method.CIRCULANT_DFT, flag)
    matrix = m.matrix if isinstance(m, Strategy) else as_matrix(m, square=True)
    lam = eigenvalues(matrix).eigenvalues
    rho, flag = ess_radius_from_eigenvalues(lam)
    return SpectrumReport(lam, rho, Method.NUMERIC_QR, flag)


def kron_ess_radius(a, k: int) -> float:
    """Essential spectral radius of the size-``n**k`` block Kronecker strategy of ``a``:
    the ``k``-th root of that of ``a``."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    report = validate_consensus(a)
    if not report.solves_consensus:
        raise DomainError("seed is not a consensus matrix: " + "; ".join(report.failures()))
    rho, _ = ess_radius_from_eigenvalues(seed_eigenvalues(a))
    return rho if k == 1 else rho ** (1.0 / k)


# --- comparison ------------------------------------------------------------------


def lazy_seed(n: int) -> np.ndarray:
    """``(I + E) / 2``: a full seed with essential spectral radius 1/2."""
    return 0.5 * np.eye(n) + 0.5 * deadbeat_seed(n)


def centered_support(size: int) -> list[int]:
    """``size`` consecutive integers around 0, e.g. ``[-1, 0, 1]`` for 3 and ``[0, 1]`` for 2."""
    lo = -((size - 1) // 2)
    return list(range(lo, lo + size))


@dataclass(frozen=True)
class ComparisonRow:
    family: str
    N: int
    n: int
    k: int
    nu: int
    ess_radius: float
    method: str
    bound_witness: float | None = None
    j: float | None = None


CSV_COLUMNS = ("family", "N", "n", "k", "nu", "ess_radius", "method")


def _rows_for(n: int, k: int, gamma: float, seed, cost_max_dim: int) -> list[ComparisonRow]:
    from .lqr import cost_report  # local import: lqr depends on this module

    N = n**k
    rows = []
    for label, a in (("kronecker-deadbeat", deadbeat_seed(n)), ("kronecker-seed", seed)):
        s = block_kron_strategy(a, k)
        rep = essential_spectral_radius(s)
        rows.append(ComparisonRow(label, N, n, k, s.nu, rep.ess_radius, rep.method.value,
                                  j=cost_report(s, gamma).j))
    c = cayley_strategy((N,), uniform_generator(centered_support(n)))
    rep = essential_spectral_radius(c)
    witness = (1.0 - rep.ess_radius) * N ** (2.0 / (c.nu - 1)) if c.nu > 1 else None
    j = cost_report(c, gamma).j if N <= cost_max_dim else None
    rows.append(ComparisonRow("cayley", N, n, k, c.nu, rep.ess_radius, rep.method.value, witness, j))
    return rows


def compare_families(n: int, k_range: Sequence[int], gamma: float = 0.0, *, seed=None,
                     cost_max_dim: int = 81, threads: int | None = None) -> list[ComparisonRow]:
    """Kronecker (deadbeat and a supplied seed) versus Cayley on ``Z_N`` with ``|S| = n``.

    For each ``N = n**k`` the table holds three rows with the essential
    spectral radius and the LQR cost ``J`` at ``gamma``; Cayley rows also carry
    ``(1 - rho) * N**(2/(nu-1))`` and leave ``J`` empty above ``cost_max_dim``.
    """
    seed = lazy_seed(n) if seed is None else as_matrix(seed, square=True)
    if seed.shape[0] != n:
        raise DomainError(f"seed must be {n}x{n}")
    ks = list(k_range)
    for k in ks:
        if n**k > config.caps.max_eig_dim:
            raise SizeError(f"N = {n}**{k} exceeds the cap of {config.caps.max_eig_dim}")
    work = [(n, k, gamma, seed, cost_max_dim) for k in ks]
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(lambda args: _rows_for(*args), work))
    else:
        chunks = [_rows_for(*args) for args in work]
    return [row for chunk in chunks for row in chunk]


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.family, r.N, r.n, r.k, r.nu, repr(r.ess_radius), r.method])
    return buf.getvalue()


def comparison_dicts(rows: Sequence[ComparisonRow]) -> list[dict]:
    return [asdict(r) for r in rows]


# --- asymptotic trend checks ------------------------------------------------------


def kron_trend(seed, ks: Sequence[int] = (2, 3, 4, 5)) -> dict:
    """Fit ``1 - rho_k ≈ mu / k`` for the Kronecker strategies of ``seed``.

    Returns the log-log slope of ``1 - rho_k`` against ``k`` (close to -1 when
    the ``1/k`` law holds), the least-squares ``mu`` and the limiting value
    ``-log rho(seed)``.
    """
    ks = np.asarray(ks, dtype=float)
    rho_a = kron_ess_radius(seed, 1)
    if not 0.0 < rho_a < 1.0:
        raise DomainError("trend fit needs 0 < rho(seed) < 1")
    gaps = 1.0 - rho_a ** (1.0 / ks)
    slope = float(np.polyfit(np.log(ks), np.log(gaps), 1)[0])
    mu = float(np.dot(gaps, 1.0 / ks) / np.dot(1.0 / ks, 1.0 / ks))
    return {"ks": ks.astype(int).tolist(), "gaps": gaps.tolist(), "slope": slope, "mu_fit": mu,
            "mu_limit": -math.log(rho_a)}


def cayley_scaling(sizes: Sequence[int], support: Sequence[int] = (-1, 0, 1)) -> list[dict]:
    """Essential spectral radius of the uniform Cayley strategy on ``Z_N`` and
    the scaled gap ``(1 - rho) * N**(2/(nu-1))`` for each ``N``."""
    nu = len(set(support))
    out = []
    for N in sizes:
        lam = cayley_spectrum_dft((N,), uniform_generator(support)).eigenvalues
        rho, _ = ess_radius_from_eigenvalues(lam)
        out.append({"N": N, "ess_radius": rho, "scaled_gap": (1.0 - rho) * N ** (2.0 / (nu - 1))})
    return out
