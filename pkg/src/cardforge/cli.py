"""Command-line interface: ``cardforge {extract,generate,qc,stats}``.

Every :class:`GeneratorConfig` field is also a ``--kebab-case`` flag. A flag
overrides the ``--config`` JSON file, which overrides the built-in default;
``CARDFORGE_SEED`` supplies the seed when neither flag nor file does.

Progress goes to stderr, machine-readable results to stdout as JSON lines.
Exit codes: 0 success, 1 validation or content error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .catalog import ClassCatalog
from .config import GeneratorConfig, resolve_config
from .errors import CardForgeError, ConfigError

EXIT_OK, EXIT_CONTENT, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("cardforge")


def _emit(**payload) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    sys.stdout.flush()


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("generator settings (override --config)")
    group.add_argument("--config", type=Path, help="flat JSON config file")
    for f in fields(GeneratorConfig):
        kind = type(f.default)
        group.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind, default=None,
                           metavar=kind.__name__.upper(), help=f"default: {f.default}")


def _config_from(args) -> GeneratorConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(GeneratorConfig)}
    return resolve_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cardforge", description="Synthetic playing-card detection datasets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="rectify annotated frame sequences into an asset library")
    p.add_argument("--frames-root", type=Path, required=True, help="directory with one frame folder per sequence")
    p.add_argument("--annotations", type=Path, required=True, help="annotation file (one quad per sequence)")
    p.add_argument("--out", type=Path, required=True, help="asset library directory")
    p.add_argument("--progress", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("generate", help="render a labeled dataset")
    p.add_argument("--assets", type=Path, required=True)
    p.add_argument("--backgrounds", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--names", type=Path, help="class names file (default: built-in 52 cards)")
    p.add_argument("--progress", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("qc", help="validate a dataset and write stats, figures and overlays")
    p.add_argument("dataset", type=Path)
    p.add_argument("--overlays", type=int, default=10, help="number of overlay images")
    p.add_argument("--sample-seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="output directory (default: <dataset>/qc)")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("stats", help="print dataset statistics without writing anything")
    p.add_argument("dataset", type=Path)
    return parser


def cmd_extract(args) -> int:
    from .pipeline import extract_library

    config = _config_from(args)
    lib = extract_library(args.frames_root, args.annotations, args.out, config, progress=args.progress)
    _emit(command="extract", assets=str(args.out), classes=len(lib.counts),
          variants=sum(lib.counts.values()), min_variants=min(lib.counts.values(), default=0))
    return EXIT_OK


def cmd_generate(args) -> int:
    from .pipeline import generate_dataset

    config = _config_from(args)
    if args.count < 0:
        raise ConfigError("--count must be >= 0")
    catalog = ClassCatalog.load(args.names) if args.names else ClassCatalog.default()
    if args.names and not args.names.is_file():
        raise ConfigError(f"names file not found: {args.names}")
    manifest = generate_dataset(args.assets, args.backgrounds, args.out, args.count, config, catalog,
                                progress=args.progress)
    digest = hashlib.sha256((args.out / "manifest.json").read_bytes()).hexdigest()
    _emit(command="generate", out=str(args.out), seed=config.seed, manifest_sha256=digest, **manifest["splits"])
    return EXIT_OK


def cmd_qc(args) -> int:
    from .qc import run_qc

    if not args.dataset.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {args.dataset}")
    out = args.out or args.dataset / "qc"
    stats = run_qc(args.dataset, out, args.overlays, args.sample_seed, figures=not args.no_figures)
    for msg in stats.errors[:20]:
        log.error(msg)
    for msg in stats.warnings:
        log.warning(msg)
    _emit(command="qc", dataset=str(args.dataset), stats=str(out / "stats.json"), errors=len(stats.errors),
          warnings=len(stats.warnings), labels=stats.total_labels, **stats.scenes)
    return EXIT_OK if stats.ok else EXIT_CONTENT


def cmd_stats(args) -> int:
    from .qc import validate_dataset

    stats = validate_dataset(args.dataset)
    _emit(command="stats", **stats.to_dict())
    return EXIT_OK if stats.ok else EXIT_CONTENT


COMMANDS = {"extract": cmd_extract, "generate": cmd_generate, "qc": cmd_qc, "stats": cmd_stats}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (CardForgeError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_CONTENT


if __name__ == "__main__":
    sys.exit(main())
