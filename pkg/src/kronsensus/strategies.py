"""Construction and validation of linear average-consensus strategies.

A strategy is a square matrix ``P`` (the closed-loop ``I + K``) iterated as
``x(t+1) = P x(t)``.  It solves average consensus iff

* (A) every row and every column sums to one,
* (B) the eigenvalue 1 is simple,
* (C) every other eigenvalue lies strictly inside the unit circle,

and it respects a communication budget ``nu`` when

* (D) every row has at most ``nu`` nonzero entries.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import config
from .errors import DomainError, ValidationError
from .graphs import DirectedGraph, communication_graph
from .groups import AbelianGroup
from .matlin import as_matrix, block_kron, eigenvalues, kron_all, read_matrix, write_matrix

SCHEMA = "kronsensus/1"


class Family(str, enum.Enum):
    BLOCK_KRONECKER = "kronecker"
    CAYLEY = "cayley"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ValidationReport:
    row_sums_ok: bool
    col_sums_ok: bool
    one_simple: bool
    spectrum_stable: bool
    degree_bound: int
    nu_limit: int | None = None
    nonnegative: bool = False
    column_degree: int = 0
    details: dict = field(default_factory=dict)

    @property
    def degree_ok(self) -> bool:
        return self.nu_limit is None or self.degree_bound <= self.nu_limit

    @property
    def solves_consensus(self) -> bool:
        """Conditions (A), (B) and (C)."""
        return self.row_sums_ok and self.col_sums_ok and self.one_simple and self.spectrum_stable

    @property
    def ok(self) -> bool:
        return self.solves_consensus and self.degree_ok

    def failures(self) -> list[str]:
        out = []
        if not self.row_sums_ok:
            out.append("A: row sums differ from 1")
        if not self.col_sums_ok:
            out.append("A: column sums differ from 1")
        if not self.one_simple:
            out.append(f"B: eigenvalue 1 has multiplicity {self.details.get('ones_count')}")
        if not self.spectrum_stable:
            out.append(f"C: an eigenvalue other than 1 has modulus {self.details.get('max_other_modulus')}")
        if not self.degree_ok:
            out.append(f"D: a row has {self.degree_bound} nonzeros, limit {self.nu_limit}")
        return out

    def to_dict(self) -> dict:
        return {
            "row_sums_ok": self.row_sums_ok,
            "col_sums_ok": self.col_sums_ok,
            "one_simple": self.one_simple,
            "spectrum_stable": self.spectrum_stable,
            "degree_bound": self.degree_bound,
            "nu_limit": self.nu_limit,
            "degree_ok": self.degree_ok,
            "nonnegative": self.nonnegative,
            "column_degree": self.column_degree,
            "solves_consensus": self.solves_consensus,
            "ok": self.ok,
            "details": dict(self.details),
        }


def row_degrees(m, zero_tol: float = config.ZERO_TOL) -> np.ndarray:
    return np.count_nonzero(np.abs(as_matrix(m)) > zero_tol, axis=1)


def validate_consensus(m, nu_limit: int | None = None, *, zero_tol: float = config.ZERO_TOL) -> ValidationReport:
    """Check conditions (A)-(C), and (D) when ``nu_limit`` is given."""
    m = as_matrix(m, square=True)
    tol = config.EPS_CMP * max(1.0, float(np.abs(m).sum(axis=1).max()))
    row_res = float(np.abs(m.sum(axis=1) - 1.0).max())
    col_res = float(np.abs(m.sum(axis=0) - 1.0).max())

    lam = eigenvalues(m).eigenvalues
    near_one = np.abs(lam - 1.0) <= config.EPS_EIG
    ones = int(near_one.sum())
    if ones:
        # drop a single copy of 1, the closest one
        drop = int(np.argmin(np.abs(lam - 1.0)))
        rest = np.delete(lam, drop)
    else:
        rest = lam
    max_other = float(np.abs(rest).max()) if rest.size else 0.0

    nnz = row_degrees(m, zero_tol)
    col_nnz = np.count_nonzero(np.abs(m) > zero_tol, axis=0)
    return ValidationReport(
        row_sums_ok=row_res <= tol,
        col_sums_ok=col_res <= tol,
        one_simple=ones == 1,
        spectrum_stable=ones >= 1 and max_other < 1.0 - config.EPS_STABLE,
        degree_bound=int(nnz.max()),
        nu_limit=nu_limit,
        nonnegative=bool(np.all(m >= 0)),
        column_degree=int(col_nnz.max()),
        details={
            "row_sum_residual": row_res,
            "col_sum_residual": col_res,
            "ones_count": ones,
            "max_other_modulus": max_other,
        },
    )


@dataclass(frozen=True, eq=False)
class Strategy:
    """A consensus matrix with its construction metadata.

    ``seed`` is the ``n x n`` seed of a block Kronecker strategy; ``group``
    and ``generator`` describe a Cayley strategy.
    """

    matrix: np.ndarray
    family: Family
    nu: int
    comm_graph: DirectedGraph
    report: ValidationReport
    n: int | None = None
    k: int | None = None
    seed: np.ndarray | None = None
    group: AbelianGroup | None = None
    generator: dict | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_valid(self) -> bool:
        return self.report.solves_consensus

    def summary(self) -> dict:
        out = {"family": self.family.value, "N": self.size, "n": self.n, "k": self.k, "nu": self.nu}
        if self.group is not None:
            out["group"] = str(self.group)
        return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _make(matrix, family, report, **meta) -> Strategy:
    matrix = _frozen(matrix)
    return Strategy(
        matrix=matrix,
        family=family,
        nu=report.degree_bound,
        comm_graph=communication_graph(matrix),
        report=report,
        **meta,
    )


def deadbeat_seed(n: int) -> np.ndarray:
    """The ``n x n`` matrix with every entry ``1/n``."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return np.full((n, n), 1.0 / n)


def kronecker_matrix(a, k: int) -> np.ndarray:
    """Stack ``I_{n^(k-1)} ⊗ a_i`` over the rows ``a_0, ..., a_{n-1}`` of ``a``."""
    a = as_matrix(a, square=True, name="seed")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    n = a.shape[0]
    eye = np.eye(n ** (k - 1))
    return np.vstack([kron_all([eye, a[i : i + 1, :]]) for i in range(n)])


def block_kron_strategy(a, k: int) -> Strategy:
    """Block Kronecker strategy of size ``n**k`` grown from a valid ``n x n`` seed."""
    a = as_matrix(a, square=True, name="seed")
    seed_report = validate_consensus(a)
    if not seed_report.solves_consensus:
        raise ValidationError("seed is not a consensus matrix: " + "; ".join(seed_report.failures()), seed_report)
    n = a.shape[0]
    if n == 1 and k > 1:
        raise DomainError("a 1x1 seed only supports k = 1")
    m = kronecker_matrix(a, k)
    report = validate_consensus(m, nu_limit=n)
    return _make(m, Family.BLOCK_KRONECKER, report, n=n, k=k, seed=_frozen(a))


def block_kron_via_product(a, k: int) -> np.ndarray:
    """Same matrix as :func:`kronecker_matrix`, built as ``(I ⊗ ... ⊗ I) ⊙ a``."""
    a = as_matrix(a, square=True, name="seed")
    n = a.shape[0]
    return block_kron(np.eye(n ** (k - 1)), a, n)


def cayley_matrix(group_dims, pi: Mapping) -> np.ndarray:
    """Matrix with ``P[i, j] = pi(g_i - g_j)`` over ``Z_{d1} x ... x Z_{dm}``."""
    group = group_dims if isinstance(group_dims, AbelianGroup) else AbelianGroup(group_dims)
    weights = np.zeros(group.order)
    for g, w in pi.items():
        weights[group.index(g)] += float(w)
    return weights[group.difference_table()]


def canonical_generator(group: AbelianGroup, pi: Mapping) -> dict:
    out: dict = {}
    for g, w in pi.items():
        key = group.canonical(g)
        out[key] = out.get(key, 0.0) + float(w)
    return out


def cayley_strategy(group_dims, pi: Mapping, *, tol: float = 1e-9) -> Strategy:
    """Cayley strategy generated by ``pi`` (a map from group elements to weights).

    The weights must sum to one.  Signed weights are accepted; conditions
    (B) and (C) are checked and reported on the returned strategy rather than
    enforced, so a degenerate generator such as ``{0: 1}`` still yields a
    strategy whose ``is_valid`` is False.
    """
    group = group_dims if isinstance(group_dims, AbelianGroup) else AbelianGroup(group_dims)
    gen = canonical_generator(group, pi)
    total = sum(gen.values())
    if abs(total - 1.0) > tol:
        raise DomainError(f"generator weights sum to {total}, not 1")
    zero = group.canonical((0,) * len(group.dims))
    if gen.get(zero, 0.0) == 0.0:
        warnings.warn("0 is not in the generator support", stacklevel=2)
    p = cayley_matrix(group, gen)
    report = validate_consensus(p)
    return _make(p, Family.CAYLEY, report, group=group, generator=gen)


def uniform_generator(support) -> dict:
    support = list(support)
    return {g: 1.0 / len(support) for g in support}


def custom_strategy(m, nu_limit: int | None = None, *, require_valid: bool = True) -> Strategy:
    m = as_matrix(m, square=True)
    report = validate_consensus(m, nu_limit=nu_limit)
    if require_valid and not report.ok:
        raise ValidationError("matrix is not a consensus strategy: " + "; ".join(report.failures()), report)
    return _make(m, Family.CUSTOM, report)


def min_steps_bound(n_agents: int, nu: int) -> int:
    """Smallest ``k`` with ``nu**k >= n_agents``."""
    if nu < 2:
        raise DomainError(f"nu must be >= 2, got {nu}")
    if n_agents < 1:
        raise DomainError(f"n_agents must be >= 1, got {n_agents}")
    k, reach = 0, 1
    while reach < n_agents:
        reach *= nu
        k += 1
    return k


def is_normal(a, tol: float = 1e-10) -> bool:
    a = as_matrix(a, square=True)
    return float(np.abs(a.T @ a - a @ a.T).max()) < tol


# --- random seeds -------------------------------------------------------------


def random_normal_seed(n: int, rng: np.random.Generator, *, kind: str = "symmetric",
                       radius: tuple[float, float] = (0.05, 0.9)) -> np.ndarray:
    """Random normal ``n x n`` matrix satisfying (A)-(C).

    ``kind="symmetric"`` gives ``E + U diag(mu) U^T`` with ``U`` an orthonormal
    basis of the complement of the ones vector and real ``mu``;
    ``kind="circulant"`` gives a real circulant with (generally complex)
    eigenvalues.  All eigenvalues other than 1 have modulus in ``radius``.
    """
    lo, hi = radius
    if kind == "symmetric":
        ones = np.ones((n, 1)) / math.sqrt(n)
        q, _ = np.linalg.qr(np.hstack([ones, rng.standard_normal((n, n - 1))]))
        u = q[:, 1:]
        mu = rng.uniform(lo, hi, n - 1) * rng.choice([-1.0, 1.0], n - 1)
        return np.full((n, n), 1.0 / n) + (u * mu) @ u.T
    if kind == "circulant":
        lam = np.zeros(n, dtype=complex)
        lam[0] = 1.0
        for m in range(1, n // 2 + 1):
            r = rng.uniform(lo, hi)
            if 2 * m == n:
                lam[m] = r * rng.choice([-1.0, 1.0])
            else:
                z = r * np.exp(2j * np.pi * rng.uniform())
                lam[m], lam[n - m] = z, np.conj(z)
        first_col = np.fft.ifft(lam).real
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return first_col[idx]
    raise DomainError(f"unknown seed kind {kind!r}")


def random_stochastic_seed(n: int, rng: np.random.Generator, *, terms: int = 3) -> np.ndarray:
    """Random nonnegative doubly stochastic seed: identity plus random permutations, mixed."""
    weights = rng.dirichlet(np.ones(terms + 1))
    a = weights[0] * np.eye(n)
    for w in weights[1:]:
        a += w * np.eye(n)[rng.permutation(n)]
    return a


# --- serialization --------------------------------------------------------------


def strategy_to_dict(s: Strategy, matrix_file: str | None) -> dict:
    out = {"schema": SCHEMA, "family": s.family.value, "n": s.n, "k": s.k, "nu": s.nu, "matrix_file": matrix_file}
    if s.group is not None:
        out["group"] = str(s.group)
        out["generator"] = {",".join(str(x) for x in g): w for g, w in sorted(s.generator.items())}
    return out


def save_strategy(json_path, s: Strategy, matrix_path=None) -> Path:
    """Write the strategy JSON and, next to it, the matrix in text format."""
    json_path = Path(json_path)
    matrix_path = Path(matrix_path) if matrix_path is not None else json_path.with_suffix(".matrix.txt")
    write_matrix(matrix_path, s.matrix)
    try:
        ref = str(matrix_path.relative_to(json_path.parent))
    except ValueError:
        ref = str(matrix_path)
    json_path.write_text(json.dumps(strategy_to_dict(s, ref), indent=2) + "\n")
    return json_path


def load_strategy(json_path) -> Strategy:
    """Rebuild a strategy from its JSON and matrix files.

    Block Kronecker seeds and Cayley generators are recovered from the matrix
    (first entries of the top rows / first column) and checked against it.
    """
    json_path = Path(json_path)
    doc = json.loads(json_path.read_text())
    if doc.get("schema") != SCHEMA:
        raise DomainError(f"unsupported schema {doc.get('schema')!r}")
    mpath = Path(doc["matrix_file"])
    if not mpath.is_absolute():
        mpath = json_path.parent / mpath
    m = read_matrix(mpath)
    family = Family(doc["family"])
    if family is Family.BLOCK_KRONECKER:
        n, k = int(doc["n"]), int(doc["k"])
        seed = np.vstack([m[i * n ** (k - 1), :n] for i in range(n)])
        s = block_kron_strategy(seed, k)
        if not np.array_equal(s.matrix, m):
            raise DomainError("matrix file is not the block Kronecker matrix of its own seed")
        return s
    if family is Family.CAYLEY:
        group = AbelianGroup.parse(doc["group"])
        gen = {tuple(int(x) for x in key.split(",")): float(w) for key, w in doc["generator"].items()}
        s = cayley_strategy(group, gen)
        if not np.array_equal(s.matrix, m):
            raise DomainError("matrix file does not match its Cayley generator")
        return s
    return custom_strategy(m, require_valid=False)
