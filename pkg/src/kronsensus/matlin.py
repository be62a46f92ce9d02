"""Dense matrix core: Kronecker and block Kronecker products, base-n digit
indices, powers and eigenvalues.

Matrices are plain two-dimensional ``float64`` numpy arrays.  Indices are
0-based and a multi-digit index ``d_1 d_2 ... d_w`` in base ``n`` denotes
``d_w + d_{w-1} n + ... + d_1 n^(w-1)`` (most significant digit first).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import config
from .errors import DomainError, NumericError, SizeError

__all__ = [
    "DigitIndex",
    "Spectrum",
    "as_matrix",
    "block_kron",
    "digit_rotate_left",
    "eigenvalues",
    "format_matrix",
    "kron",
    "kron_all",
    "mat_pow",
    "match_multisets",
    "parse_matrix",
    "power_exponent",
    "read_matrix",
    "rotation_permutation",
    "write_matrix",
]


def as_matrix(m, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-d float array, raising DomainError otherwise."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"{name} must be a non-empty 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise DomainError(f"{name} must be square, got shape {arr.shape}")
    return arr


def _check_entries(rows: int, cols: int, max_entries: int | None) -> None:
    cap = config.caps.max_product_entries if max_entries is None else max_entries
    if rows * cols > cap:
        raise SizeError(f"{rows}x{cols} result exceeds the cap of {cap} entries")


def kron(a, b, *, max_entries: int | None = None) -> np.ndarray:
    """Kronecker product ``a ⊗ b``.

    Entry ``(i*b.rows + p, j*b.cols + q)`` equals ``a[i, j] * b[p, q]``.
    """
    a = as_matrix(a, name="a")
    b = as_matrix(b, name="b")
    _check_entries(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1], max_entries)
    return np.kron(a, b)


def kron_all(matrices: Iterable, *, max_entries: int | None = None) -> np.ndarray:
    """Left-to-right Kronecker product of a sequence; the empty product is ``[[1]]``."""
    return reduce(lambda x, y: kron(x, y, max_entries=max_entries), matrices, np.ones((1, 1)))


@dataclass(frozen=True)
class DigitIndex:
    """An integer in ``[0, base**width)`` viewed as ``width`` base-``base`` digits."""

    value: int
    base: int
    width: int

    def __post_init__(self):
        if self.base < 2:
            raise DomainError(f"base must be >= 2, got {self.base}")
        if self.width < 1:
            raise DomainError(f"width must be >= 1, got {self.width}")
        if not 0 <= self.value < self.base**self.width:
            raise DomainError(f"value {self.value} out of range for {self.width} base-{self.base} digits")

    @property
    def digits(self) -> tuple[int, ...]:
        """Digits, most significant first."""
        out = []
        v = self.value
        for _ in range(self.width):
            v, d = divmod(v, self.base)
            out.append(d)
        return tuple(reversed(out))

    @classmethod
    def from_digits(cls, digits: Sequence[int], base: int) -> "DigitIndex":
        value = 0
        for d in digits:
            if not 0 <= d < base:
                raise DomainError(f"digit {d} invalid in base {base}")
            value = value * base + d
        return cls(value, base, len(digits))


def digit_rotate_left(p: DigitIndex, shift: int) -> DigitIndex:
    """Rotate the digit string of ``p`` left by ``shift`` places.

    ``shift`` must satisfy ``0 <= shift < p.width``; it is not reduced modulo
    the width.
    """
    if not 0 <= shift < p.width:
        raise DomainError(f"shift must lie in [0, {p.width}), got {shift}")
    d = p.digits
    return DigitIndex.from_digits(d[shift:] + d[:shift], p.base)


def rotation_permutation(base: int, width: int, shift: int) -> np.ndarray:
    """Vectorised :func:`digit_rotate_left` over every index of the given width.

    Rotating left by ``shift`` maps ``p = hi * base**(width-shift) + lo`` to
    ``lo * base**shift + hi``.
    """
    if not 0 <= shift < max(width, 1):
        raise DomainError(f"shift must lie in [0, {width}), got {shift}")
    p = np.arange(base**width, dtype=np.int64)
    low = base ** (width - shift)
    hi, lo = np.divmod(p, low)
    return lo * base**shift + hi


def power_exponent(dim: int, n: int) -> int:
    """Return ``u`` with ``n**u == dim``; raise DomainError when none exists."""
    if n < 2:
        raise DomainError(f"base must be >= 2, got {n}")
    u, d = 0, 1
    while d < dim:
        d *= n
        u += 1
    if d != dim:
        raise DomainError(f"dimension {dim} is not a power of {n}")
    return u


def block_kron(b, c, n: int, *, max_entries: int | None = None) -> np.ndarray:
    """Block Kronecker product ``b ⊙ c`` for square matrices of size ``n**u`` and ``n**t``.

    Row ``p`` of the result is row ``σ^t(p)`` of ``b ⊗ c``, where ``σ`` rotates
    the ``u + t`` base-``n`` digits of ``p`` one place to the left.
    """
    b = as_matrix(b, square=True, name="b")
    c = as_matrix(c, square=True, name="c")
    u = power_exponent(b.shape[0], n)
    t = power_exponent(c.shape[0], n)
    prod = kron(b, c, max_entries=max_entries)
    if u + t == 0:
        return prod
    return prod[rotation_permutation(n, u + t, t % (u + t))]


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    residual: float

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)


def eigenvalues(m, *, max_dim: int | None = None) -> Spectrum:
    """All eigenvalues of a square matrix together with the eigenpair residual.

    The residual is ``max ||m v - λ v||_2`` over the unit eigenvectors returned
    by the solver.
    """
    m = as_matrix(m, square=True)
    cap = config.caps.max_eig_dim if max_dim is None else max_dim
    if m.shape[0] > cap:
        raise SizeError(f"eigensolve of dimension {m.shape[0]} exceeds the cap of {cap}")
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue iteration did not converge: {exc}") from exc
    residual = float(np.max(np.linalg.norm(m @ v - v * w, axis=0)))
    return Spectrum(w.astype(complex), residual)


def mat_pow(m, t: int) -> np.ndarray:
    """``m**t`` by repeated squaring; ``m**0`` is the identity."""
    m = as_matrix(m, square=True)
    if t < 0:
        raise DomainError(f"exponent must be nonnegative, got {t}")
    result = np.eye(m.shape[0])
    base = m
    while t:
        if t & 1:
            result = result @ base
        t >>= 1
        if t:
            base = base @ base
    return result


def match_multisets(a, b) -> float:
    """Largest distance in the optimal one-to-one pairing of two complex multisets.

    Returns ``inf`` when the sizes differ.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


# --- text format --------------------------------------------------------------


def format_matrix(m) -> str:
    m = as_matrix(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines.extend(" ".join(format(float(x), ".17g") for x in row) for row in m)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DomainError("empty matrix text")
    try:
        rows, cols = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise DomainError(f"bad matrix header {lines[0]!r}") from exc
    if len(lines) - 1 != rows:
        raise DomainError(f"expected {rows} data rows, found {len(lines) - 1}")
    try:
        values = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise DomainError(f"non-numeric matrix entry: {exc}") from exc
    for i, row in enumerate(values):
        if len(row) != cols:
            raise DomainError(f"row {i} has {len(row)} entries, expected {cols}")
    return as_matrix(np.array(values, dtype=float).reshape(rows, cols))


def write_matrix(path, m) -> Path:
    path = Path(path)
    path.write_text(format_matrix(m))
    return path


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())
