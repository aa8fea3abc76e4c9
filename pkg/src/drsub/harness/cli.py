"""``drsub`` command line: run, validate, gen-synthetic, inspect."""
from __future__ import annotations

import argparse
import sys

from ..errors import CapabilityError, ConfigError, DataError, DrsubError, InputError
from .config import load_config
from .data import FORMATS, load_ratings, synthetic_ratings, write_ratings_tsv
from .runner import emit_csv, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    records = run_experiment(cfg)
    out = args.output or cfg.resolve(cfg.output) or f"{cfg.config_id}.csv"
    path = emit_csv(records, out)
    print(f"wrote {len(records)} rows to {path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"{args.config}: ok ({len(cfg.sweep())} sweep points)")
    return EXIT_OK


def _cmd_gen_synthetic(args) -> int:
    R = synthetic_ratings(args.users, args.items, args.density, args.r_max, args.seed)
    lines = write_ratings_tsv(R, args.output)
    print(f"wrote {lines} ratings ({R.n_users} users x {R.n_items} items) to {args.output}")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    _, report = load_ratings(args.ratings, args.format)
    print(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drsub", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write a CSV")
    run.add_argument("config")
    run.add_argument("-o", "--output", help="CSV path (overrides the config's output key)")
    run.add_argument("-j", "--workers", type=int, help="parallel sweep workers")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)

    gen = sub.add_parser("gen-synthetic", help="write a seeded synthetic ratings file (tsv)")
    gen.add_argument("output")
    gen.add_argument("--users", type=int, default=500)
    gen.add_argument("--items", type=int, default=200)
    gen.add_argument("--density", type=float, default=0.1)
    gen.add_argument("--r-max", type=int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=_cmd_gen_synthetic)

    ins = sub.add_parser("inspect", help="parse a ratings file and print a report")
    ins.add_argument("ratings")
    ins.add_argument("--format", choices=FORMATS, default="movielens-1m")
    ins.set_defaults(func=_cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CapabilityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InputError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DrsubError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
