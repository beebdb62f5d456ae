"""Command line entry point.

    heavy-markov-lab <command> --alpha F --n INT --z RE,IM --trials INT
        --seed INT --out PATH [--b INT --h INT --pool-size INT --eta-eps F
        --grid MIN,MAX,COUNT --format csv|json]

Commands: spectrum, singular, pwit-measure, rde-measure, unfold-demo,
local-convergence, edge-scan, oracle-suite, rerun.  Exit codes: 0 on
success, 2 on configuration errors, 3 on numerical faults.  The worker
count is capped by the HML_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import sys

from .lab import COMMANDS, ConfigError, ExperimentConfig, run, rerun
from .spectra import NumericalFaultError


def _parse_z(text: str) -> complex:
    try:
        re_, im = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("z must be RE,IM")
    return complex(re_, im)


def _parse_grid(text: str):
    try:
        lo, hi, count = text.split(",")
        return (float(lo), float(hi), int(count))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be MIN,MAX,COUNT")


def _parse_int_list(text: str):
    try:
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated integer list")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heavy-markov-lab",
        description="Spectral experiments on heavy-tailed random Markov matrices",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--alpha", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--n-list", type=_parse_int_list, dest="n_list")
        p.add_argument("--z", type=_parse_z, default=complex(0.0))
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--b", type=int, default=100)
        p.add_argument("--h", type=int, default=6)
        p.add_argument("--pool-size", type=int, default=400, dest="pool_size")
        p.add_argument("--eta-eps", type=float, default=0.05, dest="eta_eps")
        p.add_argument("--grid", type=_parse_grid)
        p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
        p.add_argument("--which", choices=("A_to_T0", "B_to_hatT"),
                       default="B_to_hatT")
        p.add_argument("--workers", type=int)
    p = sub.add_parser("rerun")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            manifest, same = rerun(args.manifest, args.out)
            print(f"rerun: digests {'match' if same else 'DIFFER'}")
            return 0 if same else 3
        config = ExperimentConfig(
            seed=args.seed, out=args.out, alpha=args.alpha, n=args.n,
            n_list=args.n_list, z=args.z, trials=args.trials, b=args.b,
            h=args.h, pool_size=args.pool_size, eta_eps=args.eta_eps,
            grid=args.grid, fmt=args.fmt, which=args.which,
            workers=args.workers,
        )
        manifest = run(args.command, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFaultError as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return 3
    print(f"{args.command}: wrote {len(manifest.files)} files to {config.out} "
          f"in {manifest.wall_time_s:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
