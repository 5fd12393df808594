"""Command-line entry point: ``hiddenshift <subcommand> [options]``.

Exit codes: 0 ok, 2 invalid configuration, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiment import SUBCOMMANDS, ConfigError, ExperimentConfig, render, run
from .gowers import CostGuardError
from .qsim import SimulatorCapExceeded

EXIT_CONFIG = 2
EXIT_CAP = 3


def _sizes(text: str) -> int | list[int]:
    """``8`` or an inclusive range ``4..16`` / ``4..16:2``."""
    if ".." not in text:
        return int(text)
    lo, _, rest = text.partition("..")
    hi, _, step = rest.partition(":")
    values = list(range(int(lo), int(hi) + 1, int(step) if step else 1))
    if not values:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiddenshift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--n", type=_sizes, default=4, help="variables, or a range a..b[:step]")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--delta-f", type=float, default=0.0)
        p.add_argument("--delta-g", type=float, default=0.0)
        p.add_argument(
            "--k", type=int, default=None,
            help="pair samples per attempt (norm order for `gowers`)",
        )
        p.add_argument("--swap-rounds", type=int, default=20)
        p.add_argument("--t", type=int, default=15, help="linear-extraction samples")
        p.add_argument("--rank-h", type=int, default=None)
        p.add_argument("--max-attempts", type=int, default=5)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--timing", action="store_true", help="record wall-clock time in the report")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        subcommand=args.subcommand,
        n=args.n,
        trials=args.trials,
        seed=args.seed,
        delta_f=args.delta_f,
        delta_g=args.delta_g,
        k=args.k,
        r=args.swap_rounds,
        t=args.t,
        rank_h=args.rank_h,
        max_attempts=args.max_attempts,
        out=args.out,
        format=args.format,
        workers=args.workers,
        timing=args.timing,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = config_from_args(args)
    try:
        report = run(cfg)
    except ConfigError as exc:
        print(f"hiddenshift: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulatorCapExceeded, CostGuardError, MemoryError) as exc:
        print(f"hiddenshift: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    text = render(report, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
