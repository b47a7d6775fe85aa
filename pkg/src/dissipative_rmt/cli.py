"""Command line front end.

::

    python -m dissipative_rmt spacings --config cfg.json --seed 7 --out out/sym
    python -m dissipative_rmt reproduce table2 --seed 2024 --workers 4

Exit codes: 0 success, 2 invalid config, 3 eigensolver convergence failure,
4 file system error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import runner
from .runner import ConfigError, ExperimentConfig, MemberFailure

EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

DEFAULT_REPRODUCE_SEED = 2024

# which report sections each subcommand produces
_COMMANDS = {
    "gen": ("spectra",),
    "curve": (),
    "spacings": ("spacings",),
    "ratios": ("ratios",),
    "table1": (),
    "table2": (),
}


def _common(p: argparse.ArgumentParser, config_required: bool):
    p.add_argument("--config", required=config_required, help="experiment config (JSON)")
    p.add_argument("--seed", type=int, help="master seed, overrides the config")
    p.add_argument("--workers", type=int, default=runner.default_workers(),
                   help="worker processes (default: available cores)")
    p.add_argument("--out", help="output path prefix, overrides the config")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock runtime in the summary (breaks byte-identical reruns)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dissipative-rmt", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _common(sub.add_parser(name), config_required=True)
    rep = sub.add_parser("reproduce", help="regenerate one figure's or table's data")
    rep.add_argument("target", choices=runner.REPRODUCE_TARGETS)
    _common(rep, config_required=False)
    return parser


def _load(args) -> ExperimentConfig:
    return ExperimentConfig.load(args.config, seed=args.seed, outputs=args.out)


def _expect_kind(cfg, command):
    allowed = {
        "curve": ("analytic-curve",),
        "table1": ("table1",),
        "table2": ("table2",),
        "gen": ("ensemble-largeN", "crossover", "dqkr"),
        "spacings": ("ensemble-2x2", "ensemble-largeN", "crossover", "dqkr"),
        "ratios": ("ensemble-largeN", "crossover", "dqkr", "ratio-test"),
    }[command]
    if cfg.kind not in allowed:
        raise ConfigError("kind", f"'{command}' accepts {allowed}, got {cfg.kind!r}")


def _execute(args) -> list[dict]:
    if args.workers < 1:
        raise ConfigError("--workers", "must be >= 1")
    if args.command == "reproduce":
        overrides = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    overrides = json.load(fh)
            except OSError as exc:
                raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError("config", f"invalid JSON: {exc}") from exc
            if not isinstance(overrides, dict):
                raise ConfigError("config", "must be a JSON object of parameter overrides")
            overrides = overrides.get("parameters", overrides)
        seed = args.seed if args.seed is not None else overrides.pop("seed", DEFAULT_REPRODUCE_SEED)
        return runner.reproduce(args.target, seed, args.out or "out", args.workers,
                                overrides, args.timing)
    cfg = _load(args)
    _expect_kind(cfg, args.command)
    if args.command == "table1":
        return [runner.table1(cfg, args.workers, timing=args.timing)]
    if args.command == "table2":
        return [runner.table2(cfg, args.workers, timing=args.timing)]
    sections = _COMMANDS[args.command]
    if cfg.kind in ("ensemble-2x2", "ratio-test"):
        sections = runner.SECTIONS
    return [runner.run(cfg, args.workers, sections, args.timing)]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        payloads = _execute(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemberFailure as exc:
        print(f"convergence failure in matrix {exc.index}: {exc.cause}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    for payload in payloads:
        for path in payload["files"]:
            print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
