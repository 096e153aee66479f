"""Command-line entry point.

Subcommands mirror the scenario modes plus ``preset``.  Flag values
override config-file keys; the subcommand fixes the mode.  ``--print-config``
dumps the fully resolved configuration, each line annotated with where the
value came from, and runs nothing.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import MODES, PRESET_NAMES, format_config, parse_config, \
    preset, serialize_config
from .errors import ConfigError, DomainError, InsufficientSampleError, \
    SamplingBoundError
from .harness import run_scenario

# field name -> (flag, parser/argparse type).  Booleans get paired
# --x/--no-x flags.
_FLOAT_FIELDS = ("l_a", "l_b", "delta", "l_min", "l_max", "l_step", "mu_a",
                 "mu_b", "alpha", "eta_d", "p_d", "e_d", "n_pulses",
                 "eps_rs", "eps_bar", "eps_ec", "eps_pa", "f_e",
                 "test_fraction")
_INT_FIELDS = ("k_test", "n_slots", "chunk_size", "ga_population",
               "ga_generations")
_BOOL_FIELDS = ("symmetric", "refine", "optimize_test_fraction")


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH",
                     help="flat key = value configuration file")
    sub.add_argument("--out", metavar="PATH",
                     help="output CSV path (directory for preset)")
    sub.add_argument("--seed", type=int, metavar="U64", dest="rng_seed",
                     help="RNG seed")
    sub.add_argument("--print-config", action="store_true",
                     help="print the resolved configuration and exit")
    for name in _FLOAT_FIELDS:
        extra = ["--delta-km"] if name == "delta" else []
        sub.add_argument(_flag(name), *extra, type=float, dest=name,
                         help=argparse.SUPPRESS)
    for name in _INT_FIELDS:
        sub.add_argument(_flag(name), type=int, dest=name,
                         help=argparse.SUPPRESS)
    for name in _BOOL_FIELDS:
        sub.add_argument(_flag(name), action=argparse.BooleanOptionalAction,
                         dest=name, default=None, help=argparse.SUPPRESS)
    sub.add_argument("--sampling-bound", choices=("tight", "serfling"),
                     dest="sampling_bound", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfqss",
        description="Key-rate modeling, optimization, and Monte Carlo "
                    "validation for the two-sender interferometric "
                    "secret-sharing protocol.")
    subs = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "rate": "evaluate the finite-size rate at one operating point",
        "sweep": "optimize the rate over a grid of total distances",
        "optimize": "optimize intensities at one channel configuration",
        "simulate": "Monte Carlo run compared against the analytic model",
        "compare": "sweep with free and with equal intensities, with ratios",
    }
    for mode in MODES:
        _add_common(subs.add_parser(mode, help=descriptions[mode]))
    sub = subs.add_parser("preset", help="run a named preset scenario set")
    sub.add_argument("name", help=f"one of: {', '.join(PRESET_NAMES)}")
    _add_common(sub)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    fields = (_FLOAT_FIELDS + _INT_FIELDS + _BOOL_FIELDS
              + ("rng_seed", "sampling_bound", "out"))
    return {name: getattr(args, name) for name in fields
            if getattr(args, name, None) is not None}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            return _run_preset(args)
        overrides = _overrides(args)
        text = ""
        if args.config:
            with open(args.config) as handle:
                text = handle.read()
        cfg = parse_config(text, overrides=overrides, mode=args.command)
        if args.print_config:
            print(format_config(cfg, annotate=True), end="")
            return 0
        outcome = run_scenario(cfg)
        print(outcome.summary)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, SamplingBoundError, InsufficientSampleError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _preset_document(cfg) -> str:
    # The preset's own "out" is a bare file name; it joins --out (a
    # directory) below rather than passing through the document.
    lines = [line for line in serialize_config(cfg).splitlines()
             if not line.startswith("out =")]
    return "\n".join(lines) + "\n"


def _run_preset(args: argparse.Namespace) -> int:
    overrides = _overrides(args)
    out_dir = overrides.pop("out", ".")
    for cfg in preset(args.name):
        merged = parse_config(_preset_document(cfg), overrides=overrides,
                              mode=cfg.mode)
        merged = replace(merged, out=os.path.join(out_dir, cfg.out))
        if args.print_config:
            print(format_config(merged, annotate=True))
            continue
        outcome = run_scenario(merged)
        print(outcome.summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
