"""Command line: ``xyloc <subcommand> [--config FILE] [--key value ...]``.

Exit codes: 0 success, 1 invariant violation (or failed verification),
2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .ensemble import ConfigError, RunConfig, run

SUBCOMMANDS = {
    "sample": (),
    "propagator": ("propagator",),
    "localization": ("localization",),
    "lightcone": ("lightcone",),
    "entropy": ("entropy",),
    "capacity": ("capacity",),
    "patchwork": ("patchwork",),
    "ensemble": None,  # toggles as configured
}
TOGGLES = ("localization", "lightcone", "entropy", "capacity", "patchwork", "propagator")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--manifest", help="re-run the configuration recorded in a manifest.json")
    for f in dataclasses.fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        p.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xyloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        _add_config_flags(sub.add_parser(name, help=f"run the {name} analysis"))
    v = sub.add_parser("verify", help="cross-check the free-fermion engine against the dense oracle")
    v.add_argument("--seed", type=int, default=7)
    v.add_argument("--instances", type=int, default=5)
    v.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.manifest:
        cfg = RunConfig.from_manifest(args.manifest)
    if args.config:
        cfg = RunConfig.from_file(args.config, base=cfg)
    overrides = [
        f"{f.name} = {getattr(args, f.name)}"
        for f in dataclasses.fields(RunConfig)
        if getattr(args, f.name) is not None
    ]
    cfg = RunConfig.from_text("\n".join(overrides), "<command line>", base=cfg)
    toggles = SUBCOMMANDS[args.command]
    if toggles is not None:
        for t in TOGGLES:
            if getattr(args, t) is None:
                setattr(cfg, t, t in toggles)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command == "verify":
        from .verify import run_checks

        return 0 if run_checks(seed=args.seed, instances=args.instances) else 1
    try:
        cfg = config_from_args(args)
        manifest = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(manifest['files']) + 1} files to {cfg.out}")
    for v in manifest["hard_violations"]:
        print(f"INVARIANT VIOLATION: {v}", file=sys.stderr)
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
