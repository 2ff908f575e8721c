"""Command-line entry point: ``famcast validate | run | synth``.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

from .categorize import ScoringMode
from .ingest import CatalogError, DataError, default_catalog, load_catalog, load_dataset, validate
from .pipeline import ConfigError, config_from_mapping, load_config, run
from .synth import SynthSpec, generate_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="famcast", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse the dataset and print a data-quality report")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--catalog", type=Path, help="feature catalog (default: packaged 31-feature catalog)")
    p.add_argument("--config", type=Path)

    p = sub.add_parser("run", help="train, evaluate and categorize every country")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--catalog", type=Path, help="feature catalog (default: packaged 31-feature catalog)")
    p.add_argument("--config", type=Path, help="YAML config; flags override its values")
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (0 = one per CPU)")
    p.add_argument("--category-scoring", choices=[m.value for m in ScoringMode])
    p.add_argument("--dump-models", action="store_true", default=None)

    p = sub.add_parser("synth", help="write a synthetic dataset with planted famine drivers")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--natural", type=int, default=4)
    p.add_argument("--economic", type=int, default=4)
    p.add_argument("--conflict", type=int, default=4)
    p.add_argument("--rows", type=int, default=600)
    p.add_argument("--noise", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=["nonlinear", "linear"], default="nonlinear")
    p.add_argument("--missing-rate", type=float, default=0.02)
    p.add_argument("--catalog", type=Path)
    return parser


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    catalog = load_catalog(args.catalog) if args.catalog else default_catalog()
    dataset = load_dataset(args.data, catalog)
    report = validate(dataset, (config.target_min, config.target_max))
    json.dump(report.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_run(args) -> int:
    config = load_config(args.config)
    overrides = {"out": args.out, "seed": args.seed, "threads": args.threads,
                 "category_scoring": args.category_scoring, "dump_models": args.dump_models}
    config = config_from_mapping({k: v for k, v in overrides.items() if v is not None}, config)
    bundle = run(config, args.data, args.catalog)
    s = bundle.report
    print(f"evaluated {len(s.evaluations)} countries, skipped {len(s.skipped)}; "
          f"average random forest MAE {s.average_rf_mae:.4f}")
    print(f"wrote {len(bundle.paths)} files to {bundle.out_dir}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = SynthSpec(per_category={"natural": args.natural, "economic": args.economic,
                                   "conflict": args.conflict},
                     rows_per_country=args.rows, noise=args.noise, seed=args.seed,
                     variant=args.variant, missing_rate=args.missing_rate)
    catalog = load_catalog(args.catalog) if args.catalog else None
    paths = generate_synthetic(spec, args.out, catalog)
    for p in paths.values():
        print(p)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"validate": _cmd_validate, "run": _cmd_run, "synth": _cmd_synth}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CatalogError, FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # invalid synth spec or other bad arguments
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
