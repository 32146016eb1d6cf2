"""Command-line interface.

Exit codes: 0 success / true, 1 false or negative result, 2 usage or parse
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .core import DenseTensor
from .critical import SolverConfig, verify_critical
from .data_locus import dl2_membership_222, weakly_odeco_symmetric
from .deflation import Policy, Termination, deflate, hyperdeterminant_222, sc10_experiment
from .io import (
    FormatError,
    decomposition_to_json,
    fmt,
    load_json,
    read_tensor,
    tensor_to_json,
    term_from_json,
    write_json,
)
from .stabilization import table_ascii, table_csv

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _manifest(args, outputs) -> None:
    if not args.manifest:
        return
    config = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    doc = {
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "outputs": [str(o) for o in outputs if o],
    }
    _write(args.manifest, json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _load(path):
    try:
        return read_tensor(path)
    except FormatError as exc:
        raise UsageError(f"{path}: invalid tensor at field {exc}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _solver(args) -> SolverConfig:
    try:
        return SolverConfig(
            max_iters=args.max_iters, tol=args.tol, num_starts=args.num_starts, seed=args.seed, workers=args.workers
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_stab_table(args) -> int:
    if args.n_min > args.n_max or args.d_min > args.d_max or args.n_min < 1 or args.d_min < 1:
        raise UsageError("need 1 <= n-min <= n-max and 1 <= d-min <= d-max")
    ns, ds = range(args.n_min, args.n_max + 1), range(args.d_min, args.d_max + 1)
    if args.out:
        _write(args.out, table_csv(ns, ds))
    print(table_ascii(ns, ds))
    if args.n_min < 4 or args.n_max > 10 or args.d_min < 3 or args.d_max > 15:
        print("note: entries outside n in 4..10, d in 3..15 are extrapolated by the same formula")
    _manifest(args, [args.out])
    return EXIT_OK


def cmd_deflate(args) -> int:
    t = _load(args.input)
    try:
        policy = Policy.parse(args.policy, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cfg = _solver(args)
    if args.max_steps < 1:
        raise UsageError("--max-steps must be >= 1")
    try:
        chain = deflate(t, policy, cfg, args.max_steps)
    except IndexError as exc:
        raise UsageError(str(exc)) from exc
    except (FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.log:
        _write(args.log, chain.jsonl())
    for k, s in enumerate(chain.steps, 1):
        r = s.report
        line = (
            f"step {k} scale={fmt(s.chosen.scale.real)} residual={fmt(s.chosen.residual_norm)} "
            f"norm_after={fmt(s.norm_after)} flattening_ranks={','.join(map(str, r.flattening_ranks))}"
        )
        if r.hyperdet_sign is not None:
            line += f" hyperdet_sign={r.hyperdet_sign.value} real_rank={r.real_rank}"
        print(line)
    print(f"{chain.terminated.value} steps={len(chain.steps)} final_norm={fmt(chain.final_norm)}")
    _manifest(args, [args.log])
    if chain.terminated is Termination.NO_CRITICAL_POINT:
        return EXIT_NUMERIC
    return EXIT_OK if chain.terminated is Termination.REACHED_ZERO else EXIT_FALSE


def cmd_verify(args) -> int:
    t = _load(args.input)
    try:
        term = term_from_json(load_json(args.term))
        ok, residual = verify_critical(t, term, args.tol)
    except FormatError as exc:
        raise UsageError(f"{args.term}: invalid term at field {exc}") from exc
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    print(f"critical={'true' if ok else 'false'} residual={fmt(residual)}")
    return EXIT_OK if ok else EXIT_FALSE


def cmd_odeco_gen(args) -> int:
    weights = None
    if args.weights:
        weights = [float(w) for w in args.weights.split(",")]
    try:
        t, dec = weakly_odeco_symmetric(args.s, args.t, args.n, args.d, args.seed, weights)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_json(args.out, tensor_to_json(t))
    if args.decomposition:
        write_json(args.decomposition, decomposition_to_json(dec))
    print(f"wrote {args.out} (n={args.n}, d={args.d}, terms={args.s + args.t}, kind={dec.kind.value})")
    _manifest(args, [args.out, args.decomposition])
    return EXIT_OK


def cmd_dl2_test(args) -> int:
    t = _load(args.input)
    if not isinstance(t, DenseTensor) or t.shape != (2, 2, 2):
        raise UsageError("dl2-test needs a dense 2x2x2 tensor")
    m = dl2_membership_222(t, args.tol)
    for k, v in enumerate(m, 1):
        print(f"component{k}={'true' if v else 'false'}")
    return EXIT_OK if m.any else EXIT_FALSE


def cmd_hyperdet(args) -> int:
    t = _load(args.input)
    if not isinstance(t, DenseTensor) or t.shape != (2, 2, 2):
        raise UsageError("hyperdet needs a dense 2x2x2 tensor")
    value = hyperdeterminant_222(t)
    if isinstance(value, complex):
        print(f"{fmt(value.real)} {fmt(value.imag)}")
    else:
        print(fmt(value))
    return EXIT_OK


def cmd_sc10(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    summary = sc10_experiment(args.trials, args.seed, _solver(args), odeco=args.odeco, workers=args.workers)
    if args.out:
        _write(args.out, summary.csv())
    else:
        sys.stdout.write(summary.csv())
    print(
        f"trials={len(summary.records)} negative={summary.negative} positive={summary.positive} "
        f"zero_at_tol={summary.zero_at_tol} rank_increased={summary.rank_increased}"
    )
    _manifest(args, [args.out])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tensordl", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="write a run manifest (JSON) to this path")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--seed", type=int, default=0)
    solver.add_argument("--num-starts", type=int, default=16)
    solver.add_argument("--max-iters", type=int, default=500)
    solver.add_argument("--tol", type=float, default=1e-10)
    solver.add_argument("--workers", type=int, default=None)

    s = sub.add_parser("stab-table", parents=[common], help="stabilization steps of DL_r in S^d C^n")
    s.add_argument("--n-min", type=int, default=4)
    s.add_argument("--n-max", type=int, default=10)
    s.add_argument("--d-min", type=int, default=3)
    s.add_argument("--d-max", type=int, default=15)
    s.add_argument("--out", help="CSV output path")
    s.set_defaults(func=cmd_stab_table)

    s = sub.add_parser("deflate", parents=[common, solver], help="run a deflation chain")
    s.add_argument("--input", required=True)
    s.add_argument("--policy", default="best", help="best | random | index:k")
    s.add_argument("--max-steps", type=int, default=50)
    s.add_argument("--log", help="JSON-lines chain log")
    s.set_defaults(func=cmd_deflate)

    s = sub.add_parser("verify", parents=[common], help="certify a critical rank-one approximation")
    s.add_argument("--input", required=True)
    s.add_argument("--term", required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("odeco-gen", parents=[common], help="generate a weakly odeco symmetric tensor")
    s.add_argument("--s", type=int, default=0, help="isotropic frame size")
    s.add_argument("--t", type=int, required=True, help="number of real orthonormal terms")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weights", help="comma-separated term weights")
    s.add_argument("--out", required=True)
    s.add_argument("--decomposition", help="also write the decomposition JSON")
    s.set_defaults(func=cmd_odeco_gen)

    s = sub.add_parser("dl2-test", parents=[common], help="DL_2 component membership for 2x2x2")
    s.add_argument("--input", required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_dl2_test)

    s = sub.add_parser("hyperdet", parents=[common], help="Cayley hyperdeterminant of a 2x2x2 tensor")
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_hyperdet)

    s = sub.add_parser("sc10", parents=[common, solver], help="rank change after best rank-one subtraction")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--odeco", action="store_true", help="sample diagonal tensors instead")
    s.add_argument("--out", help="CSV output path (default stdout)")
    s.set_defaults(func=cmd_sc10)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
