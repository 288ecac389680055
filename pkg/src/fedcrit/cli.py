"""Command-line entry point: ``fedcrit run | diagnose | synth | schema``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .data import synth_imbalanced, write_csv
from .errors import FedCritError
from .experiment import ExperimentConfig, diagnose_partitions, load_config, run_sweep


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("expected an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fedcrit", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep and write results.csv / summary.csv")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, default=Path("out"))
    run.add_argument("--seed-override", type=_u64, default=None)
    run.add_argument("--plots", action="store_true", help="also write SVG plots")

    diag = sub.add_parser("diagnose", help="partition diagnostics for every node count")
    diag.add_argument("--config", required=True, type=Path)
    diag.add_argument("--out", type=Path, default=Path("out"))
    diag.add_argument("--seed-override", type=_u64, default=None)
    diag.add_argument("--plots", action="store_true")

    synth = sub.add_parser("synth", help="write a synthetic imbalanced dataset as CSV")
    synth.add_argument("--out", required=True, type=Path)
    synth.add_argument("--n", type=int, default=2000)
    synth.add_argument("--d", type=int, default=2)
    synth.add_argument("--n-clusters", type=int, default=8)
    synth.add_argument("--minority-fraction", type=float, default=0.05)
    synth.add_argument("--separation", type=float, default=4.0)
    synth.add_argument("--stretch", type=float, default=1.0)
    synth.add_argument("--gap", type=float, default=0.0)
    synth.add_argument("--seed", type=_u64, default=0)

    sub.add_parser("schema", help="print the JSON schema of the config file")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        if args.command == "schema":
            print(json.dumps(ExperimentConfig.model_json_schema(), indent=2))
        elif args.command == "synth":
            ds = synth_imbalanced(args.n, args.d, args.n_clusters, args.minority_fraction,
                                  args.separation, args.seed, gap=args.gap, stretch=args.stretch)
            write_csv(ds, args.out)
            print(f"wrote {ds.n} rows ({ds.outlier_pct:.2f}% outliers) to {args.out}")
        else:
            cfg = load_config(args.config, args.seed_override)
            if args.plots:
                cfg = cfg.model_copy(update={"plots": True})
            fn = run_sweep if args.command == "run" else diagnose_partitions
            _, paths = fn(cfg, args.out)
            for path in paths.values():
                print(path)
    except FedCritError as exc:
        print(f"fedcrit: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
