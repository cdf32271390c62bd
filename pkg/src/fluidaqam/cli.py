"""Command-line entry point: ``fluidaqam <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments
from .config import ConfigError, dump_default_config, load_config
from .constellation import RecordParseError


def _common(p):
    p.add_argument("--config", help="YAML experiment file (defaults reproduce the reference setup)")
    p.add_argument("--seed", type=int, help="top-level seed; design and evaluation seeds derive from it")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--scale", choices=["desk", "paper"], help="Monte-Carlo budget preset")
    p.add_argument("--verbosity", type=int, default=0, help="0 quiet, 1 progress and solver logs, 2 debug")


def build_parser():
    parser = argparse.ArgumentParser(prog="fluidaqam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel-gen", help="sample the design ensemble and report gain moments")
    _common(p)
    p.add_argument("--format", choices=["bin", "csv"], default="bin", dest="ensemble_format")

    p = sub.add_parser("optimize", help="design one constellation per threshold")
    _common(p)

    p = sub.add_parser("re-region", help="rate/current points per strategy (vs matched baseline)")
    _common(p)
    p.add_argument("--records", nargs="*", help="record files (default: record_eps*.txt in the output dir)")

    p = sub.add_parser("dimi-sweep", help="average DIMI versus design SNR")
    _common(p)
    p.add_argument("--record", help="record file (default: the one closest to dimi_sweep.epsilon)")

    p = sub.add_parser("ssr-sweep", help="symbol success rate and current versus split factor")
    _common(p)
    p.add_argument("--records", nargs="*")

    p = sub.add_parser("default-config", help="write the default configuration file")
    p.add_argument("path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "default-config":
        try:
            dump_default_config(args.path)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, scale=args.scale)
        out = args.out or cfg.output_dir
        if args.command == "channel-gen":
            experiments.channel_gen(cfg, out, args.ensemble_format)
        elif args.command == "optimize":
            experiments.optimize(cfg, out, args.verbosity)
        elif args.command == "re-region":
            experiments.re_region(cfg, out, args.records)
        elif args.command == "dimi-sweep":
            experiments.dimi_sweep(cfg, out, args.record)
        elif args.command == "ssr-sweep":
            experiments.ssr_sweep(cfg, out, args.records)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except RecordParseError as exc:
        print(f"bad record: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
