"""Trajectory simulation of ``x(t+1) = P x(t)`` and the 81-agent
Kronecker-versus-Cayley experiment.

Random initial states come from numpy's PCG64 generator
(``np.random.default_rng(seed)``); uniform samples on ``[-50, 50]`` are
``-50 + 100 * u`` with ``u`` standard uniform, so output files are
reproducible bit for bit for a given seed.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import config
from .errors import DomainError, ValidationError
from .strategies import Strategy, block_kron_strategy, cayley_strategy, custom_strategy, deadbeat_seed, uniform_generator

SPREAD = 50.0


@dataclass(frozen=True)
class Trajectory:
    """States ``x(0..T)``; ``states`` is None when the run was too large to keep."""

    states: np.ndarray | None
    target: float
    disagreement: np.ndarray  # ||x(t) - target||_2
    disagreement_inf: np.ndarray  # ||x(t) - target||_inf
    converged: bool
    steps: int | None

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.disagreement))

    @property
    def final_error(self) -> float:
        return float(self.disagreement_inf[-1])


@dataclass(frozen=True)
class ConvergenceResult:
    converged: bool
    steps: int | None
    final_error: float


def uniform_initial_state(size: int, rng: np.random.Generator, spread: float = SPREAD) -> np.ndarray:
    return -spread + 2.0 * spread * rng.random(size)


def _matrix(strategy) -> np.ndarray:
    return np.asarray(strategy.matrix if isinstance(strategy, Strategy) else strategy, dtype=float)


def simulate(strategy, x0, t_max: int = 1000, threshold: float | None = None) -> Trajectory:
    """Iterate the strategy from ``x0`` until ``||Δ(t)||_inf <= threshold`` or ``t_max``.

    ``Δ(t) = x(t) - α 1`` with ``α`` the mean of ``x0``.  The default threshold
    is ``1e-9 * ||x0||_inf``.
    """
    m = _matrix(strategy)
    x = np.asarray(x0, dtype=float)
    if x.ndim != 1 or x.size != m.shape[0]:
        raise DomainError(f"x0 must be a vector of length {m.shape[0]}, got shape {x.shape}")
    if threshold is None:
        threshold = 1e-9 * float(np.abs(x).max())
    alpha = float(x.mean())
    keep = x.size * (t_max + 1) <= config.caps.max_dense_trajectory
    states = [x] if keep else None
    d2 = [float(np.linalg.norm(x - alpha))]
    dinf = [float(np.abs(x - alpha).max())]
    steps = 0 if dinf[0] <= threshold else None
    t = 0
    while steps is None and t < t_max:
        x = m @ x
        t += 1
        if keep:
            states.append(x)
        d2.append(float(np.linalg.norm(x - alpha)))
        dinf.append(float(np.abs(x - alpha).max()))
        if dinf[-1] <= threshold:
            steps = t
    return Trajectory(
        states=np.array(states) if keep else None,
        target=alpha,
        disagreement=np.array(d2),
        disagreement_inf=np.array(dinf),
        converged=steps is not None,
        steps=steps,
    )


def run_fixed(strategy, x0, steps: int) -> np.ndarray:
    """All states ``x(0), ..., x(steps)`` without early stopping, shape ``(steps+1, N)``."""
    m = _matrix(strategy)
    out = np.empty((steps + 1, m.shape[0]))
    out[0] = x0
    for t in range(steps):
        out[t + 1] = m @ out[t]
    return out


@dataclass(frozen=True)
class ConvergenceStats:
    results: tuple[ConvergenceResult, ...]

    @property
    def steps(self) -> list[int | None]:
        return [r.steps for r in self.results]

    def _finite(self) -> np.ndarray:
        s = [r.steps for r in self.results if r.steps is not None]
        return np.array(s, dtype=float)

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.results)

    @property
    def min(self) -> int | None:
        s = self._finite()
        return int(s.min()) if s.size else None

    @property
    def max(self) -> int | None:
        if not self.all_converged:
            return None
        return int(self._finite().max())

    @property
    def median(self) -> float | None:
        if not self.all_converged:
            return None
        return float(np.median(self._finite()))

    def to_dict(self) -> dict:
        return {"trials": len(self.results), "converged": sum(r.converged for r in self.results),
                "min": self.min, "median": self.median, "max": self.max}


def _trial(m: np.ndarray, seed: int, trial: int, threshold: float | None, t_max: int) -> ConvergenceResult:
    rng = np.random.default_rng([seed, trial])
    x0 = uniform_initial_state(m.shape[0], rng)
    thr = 1e-9 * SPREAD if threshold is None else threshold
    traj = simulate(m, x0, t_max, thr)
    return ConvergenceResult(traj.converged, traj.steps, traj.final_error)


def convergence_steps(strategy, trials: int, threshold: float | None = None, seed: int = 0, *,
                      t_max: int = 10_000, threads: int | None = None) -> ConvergenceStats:
    """Steps to reach ``||Δ||_inf <= threshold`` from ``trials`` random states in ``[-50, 50]^N``.

    Trial ``i`` draws its state from ``default_rng([seed, i])``; the default
    threshold is ``1e-9 * 50``.
    """
    if isinstance(strategy, Strategy) and not strategy.is_valid:
        raise ValidationError("strategy does not solve average consensus: "
                              + "; ".join(strategy.report.failures()), strategy.report)
    if not isinstance(strategy, Strategy):
        custom_strategy(strategy)  # raises on invalid matrices
    m = _matrix(strategy)
    work = [(m, seed, i, threshold, t_max) for i in range(trials)]
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda args: _trial(*args), work))
    else:
        results = [_trial(*w) for w in work]
    return ConvergenceStats(tuple(results))


# --- CSV ---------------------------------------------------------------------------


def trajectory_csv(states: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"agent_{i}" for i in range(states.shape[1])])
    for t, row in enumerate(states):
        writer.writerow([t] + [repr(float(v)) for v in row])
    return buf.getvalue()


def disagreement_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "norm2", "norminf"])
    for t, (a, b) in enumerate(zip(traj.disagreement, traj.disagreement_inf)):
        writer.writerow([t, repr(float(a)), repr(float(b))])
    return buf.getvalue()


def read_trajectory_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in row[1:]] for row in rows[1:]])


def figure_strategies(n: int = 3, k: int = 4) -> tuple[Strategy, Strategy]:
    """Deadbeat block Kronecker and uniform ``{-1, 0, 1}`` Cayley strategies on ``n**k`` agents."""
    kron = block_kron_strategy(deadbeat_seed(n), k)
    cay = cayley_strategy((n**k,), uniform_generator([-1, 0, 1]))
    return kron, cay


def replicate_figure(seed: int, out_dir, steps: int = 30) -> tuple[Path, Path]:
    """Run both 81-agent strategies from one random state in ``[-50, 50]^81``.

    Writes ``kronecker.csv`` and ``cayley.csv`` (one row per step, one column
    per agent) into ``out_dir`` and returns their paths.
    """
    kron, cay = figure_strategies()
    rng = np.random.default_rng(seed)
    x0 = uniform_initial_state(kron.size, rng)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, s in (("kronecker", kron), ("cayley", cay)):
        path = out_dir / f"{name}.csv"
        path.write_text(trajectory_csv(run_fixed(s, x0, steps)))
        paths.append(path)
    return paths[0], paths[1]


def spread(states: np.ndarray) -> np.ndarray:
    """Per-step spread ``max - min`` across agents."""
    return states.max(axis=1) - states.min(axis=1)


def spread_ratio_ok(kron_states: np.ndarray, cay_states: np.ndarray, t: int = 4, factor: float = 1e3) -> bool:
    """True when the Cayley spread at step ``t`` exceeds the Kronecker spread by ``factor``."""
    return bool(spread(cay_states)[t] >= factor * spread(kron_states)[t])
