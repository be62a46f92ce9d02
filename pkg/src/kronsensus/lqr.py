"""LQR cost of a consensus strategy.

For ``x(t+1) = M x(t)`` with ``x(0)`` of identity covariance,

    J1 = E Σ_t ||x(t) - x(∞)||²   = Σ_t (Tr(M^tᵀ M^t) - 1)
    J2 = E Σ_t ||x(t+1) - x(t)||² = 2 J1 - (N - 1) - 2 Σ_t (Tr(M^tᵀ M^(t+1)) - 1)
    J  = J1 + gamma * J2

The second line follows from ``Tr((M-I)ᵀ M^tᵀ M^t (M-I))`` summed over ``t``;
the ``t = 0`` term of ``Tr(M^tᵀ M^t) - 1`` appears once, not twice, which is
where the ``N - 1`` comes from.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import config
from .errors import DivergenceError, DomainError
from .matlin import as_matrix, eigenvalues
from .spectral import ess_radius_from_eigenvalues, essential_spectral_radius
from .strategies import Family, Strategy, custom_strategy, is_normal, validate_consensus


class CostMethod(str, enum.Enum):
    EXACT_SERIES = "ExactSeries"
    CLOSED_FORM = "ClosedForm"
    MONTE_CARLO = "MonteCarlo"


class TruncationWarning(UserWarning):
    """The horizon of a Monte Carlo run leaves a tail larger than its standard error."""


@dataclass(frozen=True)
class SeriesTerm:
    t: int
    tr_mtm: float
    tr_cross: float


@dataclass(frozen=True)
class SeriesSum:
    j1: float
    cross: float  # Σ (Tr(M^tᵀ M^(t+1)) - 1)
    terms: int
    tail_bound: float
    rho: float
    size: int

    @property
    def j2(self) -> float:
        return 2.0 * self.j1 - (self.size - 1) - 2.0 * self.cross


def _as_strategy(m) -> Strategy:
    if isinstance(m, Strategy):
        return m
    return custom_strategy(m, require_valid=False)


def _check_defined(s: Strategy) -> float:
    if not s.report.solves_consensus:
        raise DomainError("cost is undefined: " + "; ".join(s.report.failures()))
    rho = essential_spectral_radius(s).ess_radius
    if rho >= 1.0:
        raise DivergenceError(f"essential spectral radius {rho} >= 1, the cost series diverges")
    return rho


def _seed_traces(a: np.ndarray) -> Iterator[tuple[float, float]]:
    """Yield ``(Tr((AᵀA)^t), Tr(Aᵀ^t A^(t+1)))`` for t = 0, 1, ..."""
    ata = a.T @ a
    p = np.eye(a.shape[0])  # (AᵀA)^t
    q = np.eye(a.shape[0])  # A^t
    while True:
        aq = a @ q
        yield float(np.trace(p)), float(np.sum(q * aq))
        p = p @ ata
        q = aq


def series_terms(m) -> Iterator[SeriesTerm]:
    """Infinite stream of trace terms of the strategy ``m``.

    Block Kronecker strategies with a normal seed never form powers of the
    large matrix: ``Tr(M^tᵀ M^t) = Tr((AᵀA)^r)^(k-s) Tr((AᵀA)^(r+1))^s`` for
    ``t = r k + s`` and ``Tr(M^tᵀ M^(t+1)) = Tr(Aᵀ^t A^(t+1))``.
    """
    s = _as_strategy(m)
    if s.family is Family.BLOCK_KRONECKER and is_normal(s.seed):
        k = s.k
        seed_iter = _seed_traces(np.asarray(s.seed))
        tr_pow = [next(seed_iter)]
        t = 0
        while True:
            r, rem = divmod(t, k)
            while len(tr_pow) <= t + 1:
                tr_pow.append(next(seed_iter))
            mtm = tr_pow[r][0] ** (k - rem) * tr_pow[r + 1][0] ** rem
            yield SeriesTerm(t, mtm, tr_pow[t][1])
            t += 1
    else:
        matrix = np.asarray(s.matrix)
        p = np.eye(s.size)
        t = 0
        while True:
            nxt = matrix @ p
            yield SeriesTerm(t, float(np.sum(p * p)), float(np.sum(p * nxt)))
            p = nxt
            t += 1


def _horizon(rho: float, rel_tol: float, k: int) -> int:
    if rho <= 0.0:
        base = 0
    else:
        base = math.ceil(math.log(rel_tol) / math.log(rho * rho))
    return min(max(4 * k, base), config.caps.max_series_terms)


def sum_series(m, rel_tol: float = 1e-12) -> SeriesSum:
    """Sum the J1 and cross-trace series with the library's truncation rule.

    Terms are summed up to ``max(4k, ceil(log(rel_tol) / log(rho²)))`` and then
    for as long as the geometric tail estimate ``term * rho² / (1 - rho²)``
    exceeds ``rel_tol`` times the partial sum (capped at
    ``config.caps.max_series_terms``).  Terms at the round-off level of a
    trace of size N also end the sum, since later ones carry no signal.
    """
    s = _as_strategy(m)
    rho = _check_defined(s)
    horizon = _horizon(rho, rel_tol, s.k or 1)
    ratio = rho * rho / (1.0 - rho * rho)
    floor = 64.0 * np.finfo(float).eps * s.size
    j1 = cross = 0.0
    tail = 0.0
    count = 0
    for term in series_terms(s):
        a = term.tr_mtm - 1.0
        b = term.tr_cross - 1.0
        j1 += a
        cross += b
        count += 1
        tail = max(abs(a), abs(b)) * ratio
        if count >= horizon and (tail <= rel_tol * max(abs(j1), abs(cross)) or max(abs(a), abs(b)) <= floor):
            break
        if count >= config.caps.max_series_terms:
            break
    return SeriesSum(j1, cross, count, tail, rho, s.size)


def j1_exact(m, rel_tol: float = 1e-12) -> float:
    """Disagreement cost ``E Σ ||x(t) - x(∞)||²``."""
    return sum_series(m, rel_tol).j1


def j2_exact(m, rel_tol: float = 1e-12) -> float:
    """Update cost ``E Σ ||x(t+1) - x(t)||²``."""
    return sum_series(m, rel_tol).j2


def _normal_seed(a) -> tuple[np.ndarray, float, np.ndarray]:
    a = as_matrix(a, square=True, name="seed")
    if not is_normal(a):
        raise DomainError("seed is not normal")
    report = validate_consensus(a)
    if not report.solves_consensus:
        raise DomainError("seed is not a consensus matrix: " + "; ".join(report.failures()))
    lam = eigenvalues(a).eigenvalues
    rho, _ = ess_radius_from_eigenvalues(lam)
    others = np.delete(lam, int(np.argmin(np.abs(lam - 1.0))))
    return a, rho, others


def j1_bounds(a, k: int) -> tuple[float, float]:
    """Closed-form lower and upper estimates ``(J_L, J_U)`` of J1 for a normal seed.

    ``J_L = Σ_{s<k} n^(k-s) τ^s - k`` with ``τ = Tr(AᵀA)`` is the sum of the
    first ``k`` series terms and always a lower bound.  ``J_U = J_L + k (τ - 1)
    / (1 - rho²)`` is returned unchanged; it undercounts the neglected
    terms for ``k >= 2`` (see :func:`j1_upper_safe` for a guaranteed bound).
    """
    a, rho, _ = _normal_seed(a)
    n = a.shape[0]
    tau = float(np.sum(a * a))
    lower = sum(n ** (k - s) * tau**s for s in range(k)) - k
    upper = lower + k / (1.0 - rho * rho) * (tau - 1.0)
    return lower, upper


def j1_upper_safe(a, k: int) -> float:
    """Guaranteed upper bound ``J_L + k (τ^k - 1) / (1 - rho²)`` on J1 for a normal seed."""
    a, rho, _ = _normal_seed(a)
    tau = float(np.sum(a * a))
    lower, _ = j1_bounds(a, k)
    return lower + k * (tau**k - 1.0) / (1.0 - rho * rho)


def j2_bounds(a, k: int, j1: float | None = None) -> tuple[float, float]:
    """Closed-form estimates ``(2 J1 - N - Σ 1/(1-|ρ_i|²), 2 J1 - N)`` around J2.

    ``ρ_i`` are the eigenvalues of the seed other than 1.  These are the
    original expressions, kept unchanged; :func:`j2_normal_seed` gives the
    exact value they are meant to bracket.
    """
    a, _, others = _normal_seed(a)
    n = a.shape[0]
    N = n**k
    if j1 is None:
        from .strategies import block_kron_strategy

        j1 = j1_exact(block_kron_strategy(a, k))
    spread = float(np.sum(1.0 / (1.0 - np.abs(others) ** 2)))
    return 2.0 * j1 - N - spread, 2.0 * j1 - N


def j2_normal_seed(a, k: int, j1: float) -> float:
    """Exact J2 of a block Kronecker strategy with normal seed, given its J1.

    The cross-trace series sums to ``Re Σ_i ρ_i / (1 - |ρ_i|²)``.
    """
    a, _, others = _normal_seed(a)
    N = a.shape[0] ** k
    cross = float(np.real(np.sum(others / (1.0 - np.abs(others) ** 2))))
    return 2.0 * j1 - (N - 1) - 2.0 * cross


def j_closed_form_deadbeat(n: int, k: int, gamma: float) -> float:
    """Leading-order cost ``N ((1+2γ)(1-1/N)/(1-1/n) - γ)`` of the deadbeat strategy."""
    if n < 2 or k < 1:
        raise DomainError(f"need n >= 2 and k >= 1, got n={n}, k={k}")
    N = n**k
    return N * ((1.0 + 2.0 * gamma) * (1.0 - 1.0 / N) / (1.0 - 1.0 / n) - gamma)


def j_deadbeat_exact(n: int, k: int) -> tuple[float, float]:
    """Exact ``(J1, J2)`` of the deadbeat strategy: only the first k terms are nonzero."""
    N = n**k
    j1 = float(sum(n ** (k - t) - 1 for t in range(k)))
    return j1, 2.0 * j1 - (N - 1)


def j_riccati_unconstrained(n_agents: int, gamma: float) -> float:
    """Optimal cost ``N (1 + sqrt(1 + 4γ)) / 2`` when every agent sees every other."""
    if gamma < 0:
        raise DomainError(f"gamma must be nonnegative, got {gamma}")
    return n_agents * (1.0 + math.sqrt(1.0 + 4.0 * gamma)) / 2.0


# --- Monte Carlo ------------------------------------------------------------------


class MonteCarloEstimate(NamedTuple):
    estimate: float
    std_error: float


MC_CHUNK = 1024


def _mc_chunk(matrix: np.ndarray, gamma: float, size: int, horizon: int, seed: int, chunk: int,
              dist: str) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, chunk])))
    N = matrix.shape[0]
    if dist == "normal":
        x = rng.standard_normal((N, size))
    elif dist == "uniform":
        x = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), (N, size))
    else:
        raise DomainError(f"unknown initial distribution {dist!r}")
    target = x.mean(axis=0)
    cost = np.zeros(size)
    for _ in range(horizon):
        nxt = matrix @ x
        cost += np.sum((x - target) ** 2, axis=0) + gamma * np.sum((nxt - x) ** 2, axis=0)
        x = nxt
    return cost


def _tail_estimate(s: Strategy, gamma: float, horizon: int, rho: float) -> float:
    p = np.linalg.matrix_power(np.asarray(s.matrix), horizon)
    nxt = s.matrix @ p
    term1 = float(np.sum(p * p)) - 1.0
    term2 = float(np.sum((nxt - p) ** 2))
    return max(term1 + gamma * term2, 0.0) / (1.0 - rho * rho)


def j_monte_carlo(m, gamma: float, trials: int, horizon: int | None = None, seed: int = 0, *,
                  dist: str = "normal", threads: int | None = None) -> MonteCarloEstimate:
    """Sample mean and standard error of ``Σ_{t<horizon} ||x(t)-x(∞)||² + γ||u(t)||²``.

    Trials are drawn in chunks of ``MC_CHUNK``; chunk ``c`` uses the PCG64
    stream seeded by ``SeedSequence([seed, c])``, so results do not depend on
    ``threads``.  ``dist`` selects standard normal or uniform(-√3, √3)
    initial states (both unit variance).  A TruncationWarning is issued when
    the estimated tail beyond ``horizon`` exceeds the standard error.
    """
    s = _as_strategy(m)
    rho = _check_defined(s)
    if trials < 2:
        raise DomainError("need at least 2 trials")
    if horizon is None:
        horizon = _horizon(rho, 1e-12, s.k or 1)
    matrix = np.asarray(s.matrix)
    sizes = [min(MC_CHUNK, trials - start) for start in range(0, trials, MC_CHUNK)]
    jobs = [(matrix, gamma, size, horizon, seed, c, dist) for c, size in enumerate(sizes)]
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda args: _mc_chunk(*args), jobs))
    else:
        parts = [_mc_chunk(*job) for job in jobs]
    samples = np.concatenate(parts)
    est = MonteCarloEstimate(float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(trials)))
    tail = _tail_estimate(s, gamma, horizon, rho)
    if tail > est.std_error:
        warnings.warn(f"horizon {horizon} leaves an estimated tail of {tail:.3g} "
                      f"> standard error {est.std_error:.3g}", TruncationWarning, stacklevel=2)
    return est


# --- reports ------------------------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    gamma: float
    j1: float
    j2: float
    j: float
    method: CostMethod
    j1_lower: float | None = None
    j1_upper: float | None = None
    j2_lower: float | None = None
    j2_upper: float | None = None
    truncation_t: int = 0
    tail_bound: float = 0.0
    std_error: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def cost_report(m, gamma: float = 0.0, *, method: str = "exact", rel_tol: float = 1e-12,
                trials: int = 10_000, horizon: int | None = None, seed: int = 0,
                threads: int | None = None) -> CostReport:
    """Evaluate J1, J2 and J for a strategy.

    ``method`` is ``"exact"`` (trace series), ``"closed-form"`` (deadbeat block
    Kronecker strategies only) or ``"monte-carlo"``.  The closed-form J1/J2
    estimates are attached for block Kronecker strategies with a normal seed.
    """
    if gamma < 0:
        raise DomainError(f"gamma must be nonnegative, got {gamma}")
    s = _as_strategy(m)
    bounds: dict = {}
    normal_kron = s.family is Family.BLOCK_KRONECKER and is_normal(s.seed)

    if method == "exact":
        ser = sum_series(s, rel_tol)
        j1, j2 = ser.j1, ser.j2
        extra = {"truncation_t": ser.terms, "tail_bound": ser.tail_bound}
        kind = CostMethod.EXACT_SERIES
    elif method == "closed-form":
        if s.family is not Family.BLOCK_KRONECKER or not np.allclose(s.seed, 1.0 / s.n, rtol=0, atol=1e-15):
            raise DomainError("closed-form costs are only available for deadbeat block Kronecker strategies")
        j1, j2 = j_deadbeat_exact(s.n, s.k)
        extra = {"truncation_t": s.k, "tail_bound": 0.0}
        kind = CostMethod.CLOSED_FORM
    elif method == "monte-carlo":
        r1 = j_monte_carlo(s, 0.0, trials, horizon, seed, threads=threads)
        r2 = j_monte_carlo(s, 1.0, trials, horizon, seed, threads=threads)
        j1, j2 = r1.estimate, r2.estimate - r1.estimate
        joint = j_monte_carlo(s, gamma, trials, horizon, seed, threads=threads)
        extra = {"truncation_t": horizon or 0, "tail_bound": 0.0, "std_error": joint.std_error}
        kind = CostMethod.MONTE_CARLO
    else:
        raise DomainError(f"unknown cost method {method!r}")

    if normal_kron:
        lo, hi = j1_bounds(s.seed, s.k)
        j2lo, j2hi = j2_bounds(s.seed, s.k, j1)
        bounds = {"j1_lower": lo, "j1_upper": hi, "j2_lower": j2lo, "j2_upper": j2hi}
    return CostReport(gamma=gamma, j1=j1, j2=j2, j=j1 + gamma * j2, method=kind, **bounds, **extra)


SWEEP_COLUMNS = ("gamma", "j1", "j2", "j", "j1_lower", "j1_upper")


def gamma_sweep(m, gammas: Sequence[float], rel_tol: float = 1e-12) -> list[CostReport]:
    base = cost_report(m, 0.0, rel_tol=rel_tol)
    return [CostReport(**{**base.__dict__, "gamma": g, "j": base.j1 + g * base.j2}) for g in gammas]


def sweep_csv(reports: Sequence[CostReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in reports:
        writer.writerow(["" if getattr(r, c) is None else repr(float(getattr(r, c))) for c in SWEEP_COLUMNS])
    return buf.getvalue()
