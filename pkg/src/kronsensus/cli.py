"""Command-line front end.

    python -m kronsensus build --family kronecker --n 3 --k 4 --seed-matrix deadbeat
    python -m kronsensus spectrum --family cayley --group 81 --support -1,0,1
    python -m kronsensus cost --family kronecker --n 3 --k 2 --gamma 1

stdout carries one JSON document (or CSV with ``--format csv``).  Exit status
is 0 on success, 1 when a matrix fails validation or an analysis is refused,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import KronsensusError
from .groups import AbelianGroup, parse_element, split_elements
from .lqr import cost_report, gamma_sweep, sweep_csv
from .matlin import read_matrix
from .sim import (
    convergence_steps,
    disagreement_csv,
    read_trajectory_csv,
    replicate_figure,
    simulate,
    spread,
    spread_ratio_ok,
    trajectory_csv,
    uniform_initial_state,
)
from .spectral import comparison_csv, comparison_dicts, compare_families, essential_spectral_radius, lazy_seed
from .strategies import (
    SCHEMA,
    block_kron_strategy,
    cayley_strategy,
    custom_strategy,
    deadbeat_seed,
    load_strategy,
    save_strategy,
    validate_consensus,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- parsing helpers -----------------------------------------------------------------

_WEIGHTED = re.compile(r"\s*(\([^()]*\)|[-+]?\d+)\s*:\s*([^,]+)\s*(?:,|$)")


def parse_generator(text: str, tol: float = 1e-9) -> dict:
    """Parse ``"uniform:-1,0,1"``, ``"0:0.5,1:0.5"`` or tuple forms such as
    ``"uniform:(0,0),(1,0),(0,1)"`` into ``{element: weight}``."""
    text = text.strip()
    gen: dict = {}
    if text.startswith("uniform:"):
        try:
            elems = [parse_element(tok) for tok in split_elements(text[len("uniform:"):])]
        except KronsensusError as exc:
            raise UsageError(str(exc)) from exc
        if not elems:
            raise UsageError("uniform generator needs at least one element")
        for g in elems:
            gen[g] = gen.get(g, 0.0) + 1.0 / len(elems)
    else:
        pos = 0
        while pos < len(text):
            m = _WEIGHTED.match(text, pos)
            if not m:
                raise UsageError(f"cannot parse generator near {text[pos:]!r}")
            try:
                g = parse_element(m.group(1))
                w = float(m.group(2))
            except (KronsensusError, ValueError) as exc:
                raise UsageError(f"bad generator entry {m.group(0)!r}") from exc
            gen[g] = gen.get(g, 0.0) + w
            pos = m.end()
        if not gen:
            raise UsageError("empty generator")
    total = sum(gen.values())
    if abs(total - 1.0) > tol:
        raise UsageError(f"generator weights sum to {total!r}, not 1")
    return {g[0] if len(g) == 1 else g: w for g, w in gen.items()}


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _seed_matrix(name: str, n: int | None):
    if name in ("deadbeat", "lazy"):
        if n is None:
            raise UsageError("--n is required with a named seed matrix")
        return deadbeat_seed(n) if name == "deadbeat" else lazy_seed(n)
    path = Path(name)
    if not path.exists():
        raise UsageError(f"seed matrix {name!r} is neither 'deadbeat', 'lazy' nor a file")
    return read_matrix(path)


def build_strategy(args):
    if args.strategy:
        return load_strategy(args.strategy)
    family = args.family
    if family is None:
        raise UsageError("one of --family or --strategy is required")
    if family == "kronecker":
        if args.k is None:
            raise UsageError("--k is required for the kronecker family")
        seed = _seed_matrix(args.seed_matrix or "deadbeat", args.n)
        if args.n is not None and seed.shape[0] != args.n:
            raise UsageError(f"seed matrix is {seed.shape[0]}x{seed.shape[0]} but --n is {args.n}")
        return block_kron_strategy(seed, args.k)
    if family == "cayley":
        if not args.group:
            raise UsageError("--group is required for the cayley family")
        try:
            group = AbelianGroup.parse(args.group)
        except KronsensusError as exc:
            raise UsageError(str(exc)) from exc
        if args.generator and args.support:
            raise UsageError("give either --generator or --support, not both")
        if args.generator:
            gen = parse_generator(args.generator)
        elif args.support:
            gen = parse_generator("uniform:" + args.support)
        else:
            raise UsageError("--generator or --support is required for the cayley family")
        return cayley_strategy(group, gen)
    if family == "custom":
        if not args.matrix:
            raise UsageError("--matrix is required for the custom family")
        return custom_strategy(read_matrix(args.matrix), require_valid=False)
    raise UsageError(f"unknown family {family!r}")


# --- output --------------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _emit(args, doc=None, csv_text: str | None = None) -> None:
    if args.format == "csv":
        if csv_text is None:
            raise UsageError(f"{args.command} has no CSV output")
        text = csv_text
    else:
        text = json.dumps(_clean({"schema": SCHEMA, "command": args.command, **doc}), indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("KRONSENSUS_THREADS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"KRONSENSUS_THREADS must be an integer, got {env!r}") from exc
    return None


# --- subcommands ---------------------------------------------------------------------


def cmd_build(args) -> int:
    s = build_strategy(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = save_strategy(out_dir / f"{args.name}.json", s, out_dir / f"{args.name}.matrix.txt")
    _emit(args, {"strategy": s.summary(), "strategy_file": str(json_path),
                 "matrix_file": str(out_dir / f"{args.name}.matrix.txt"), "validation": s.report.to_dict()})
    return EXIT_OK if s.is_valid else EXIT_INVALID


def cmd_validate(args) -> int:
    s = build_strategy(args)
    report = validate_consensus(s.matrix, nu_limit=args.nu_limit)
    _emit(args, {"strategy": s.summary(), "validation": report.to_dict()})
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_spectrum(args) -> int:
    s = build_strategy(args)
    rep = essential_spectral_radius(s, method=args.method)
    lam = rep.eigenvalues
    doc = {"strategy": s.summary(), "ess_radius": rep.ess_radius, "method": rep.method.value,
           "dim_ker_flag": rep.dim_ker_flag}
    if args.eigenvalues:
        doc["eigenvalues"] = [[float(z.real), float(z.imag)] for z in lam]
    csv_text = "re,im\n" + "".join(f"{float(z.real)!r},{float(z.imag)!r}\n" for z in lam)
    _emit(args, doc, csv_text)
    return EXIT_OK


def cmd_cost(args) -> int:
    s = build_strategy(args)
    if args.gammas:
        reports = gamma_sweep(s, _float_list(args.gammas))
        _emit(args, {"strategy": s.summary(), "sweep": [r.to_dict() for r in reports]}, sweep_csv(reports))
        return EXIT_OK
    rep = cost_report(s, args.gamma, method=args.method, trials=args.trials, horizon=args.horizon,
                      seed=args.seed, threads=_threads(args))
    _emit(args, {"strategy": s.summary(), **rep.to_dict()}, sweep_csv([rep]))
    return EXIT_OK


def cmd_simulate(args) -> int:
    s = build_strategy(args)
    if args.trials:
        stats = convergence_steps(s, args.trials, args.threshold, args.seed, t_max=args.t_max,
                                  threads=_threads(args))
        _emit(args, {"strategy": s.summary(), "convergence": stats.to_dict()})
        return EXIT_OK
    if args.x0:
        x0 = np.loadtxt(args.x0, dtype=float, ndmin=1)
    else:
        x0 = uniform_initial_state(s.size, np.random.default_rng(args.seed))
    traj = simulate(s, x0, args.t_max, args.threshold)
    if args.disagreement_output:
        Path(args.disagreement_output).write_text(disagreement_csv(traj))
    doc = {"strategy": s.summary(), "converged": traj.converged, "steps": traj.steps,
           "final_error": traj.final_error, "target": traj.target}
    _emit(args, doc, trajectory_csv(traj.states) if traj.states is not None else None)
    return EXIT_OK


def cmd_compare(args) -> int:
    seed = _seed_matrix(args.seed_matrix, args.n) if args.seed_matrix else None
    rows = compare_families(args.n, _int_list(args.k_range), args.gamma, seed=seed, threads=_threads(args))
    _emit(args, {"rows": comparison_dicts(rows)}, comparison_csv(rows))
    return EXIT_OK


def cmd_replicate(args) -> int:
    kron_path, cay_path = replicate_figure(args.seed, args.out_dir, args.steps)
    kron_states, cay_states = read_trajectory_csv(kron_path), read_trajectory_csv(cay_path)
    t = min(4, args.steps)
    _emit(args, {"files": [str(kron_path), str(cay_path)], "steps": args.steps, "spread_at_t": t,
                 "kronecker_spread": spread(kron_states)[t], "cayley_spread": spread(cay_states)[t],
                 "spread_ratio_ok": spread_ratio_ok(kron_states, cay_states, t)})
    return EXIT_OK


# --- parser --------------------------------------------------------------------------


def _strategy_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("strategy")
    g.add_argument("--family", choices=["kronecker", "cayley", "custom"])
    g.add_argument("--n", type=int, help="seed dimension")
    g.add_argument("--k", type=int, help="Kronecker exponent")
    g.add_argument("--seed-matrix", help="'deadbeat', 'lazy' or a matrix file")
    g.add_argument("--group", help="'N' or 'NxM...'")
    g.add_argument("--support", help="uniform generator support, e.g. -1,0,1")
    g.add_argument("--generator", help="e.g. 0:0.5,1:0.5 or uniform:(0,0),(1,0)")
    g.add_argument("--matrix", help="matrix file for the custom family")
    g.add_argument("--strategy", help="strategy JSON written by build")
    return p


def _output_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--threads", type=int, help="worker threads (default: $KRONSENSUS_THREADS or 1)")
    return p


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kronsensus", description="Average-consensus strategies: "
                                     "build, validate, analyse and simulate.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    strat, out = _strategy_options(), _output_options()

    p = sub.add_parser("build", parents=[strat, out], help="write matrix and strategy JSON")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name", default="strategy")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", parents=[strat, out], help="check conditions (A)-(D)")
    p.add_argument("--nu-limit", type=int)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("spectrum", parents=[strat, out], help="essential spectral radius")
    p.add_argument("--method", choices=["auto", "numeric"], default="auto")
    p.add_argument("--eigenvalues", action="store_true", help="include the eigenvalue list")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("cost", parents=[strat, out], help="LQR cost J = J1 + gamma J2")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--gammas", help="comma-separated gamma sweep")
    p.add_argument("--method", choices=["exact", "closed-form", "monte-carlo"], default="exact")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--horizon", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("simulate", parents=[strat, out], help="run x(t+1) = P x(t)")
    p.add_argument("--t-max", type=int, default=1000)
    p.add_argument("--threshold", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", help="file with one initial state per line")
    p.add_argument("--trials", type=int, help="report steps-to-threshold statistics instead")
    p.add_argument("--disagreement-output", help="also write t,norm2,norminf CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[out], help="Kronecker versus Cayley table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-range", required=True, help="e.g. 2,3,4")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--seed-matrix", help="'deadbeat', 'lazy' or a matrix file (default lazy)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("replicate-figure", parents=[out], help="81-agent trajectories as CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--steps", type=int, default=30)
    p.set_defaults(func=cmd_replicate)
    return parser


_VALUE_FLAGS = {"--support", "--generator", "--k-range", "--gammas"}


def _glue_values(argv: list[str]) -> list[str]:
    """Turn ``--support -1,0,1`` into ``--support=-1,0,1`` so argparse does not
    read the value as an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = _glue_values(list(sys.argv[1:] if argv is None else argv))
    parser = make_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kronsensus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KronsensusError, OSError) as exc:
        print(f"kronsensus: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
