"""Command-line entry points.

Subcommands: ``sweep <config>`` runs a configured parameter sweep and
writes the CSV, ``plot <csv> <out>`` renders a CSV into an SVG,
``validate <config>`` checks a configuration and its base scenario, and
``cache clear`` empties a matrix cache directory.  Failures exit
nonzero after printing the error class name; ``HOLOMIMO_WORKERS``
controls sweep parallelism.
"""

import argparse
import sys
from pathlib import Path

from .cache import MatrixCache
from .errors import HoloMimoError, ValidationError
from .geometry import validate_scenario
from .sweep import emit_plot, parse_config, read_csv_rows, run_sweep, scenario_for


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="holomimo",
        description="Holographic planar array uplink simulator and optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    p_sweep.add_argument("config", help="path to the YAML sweep configuration")
    p_sweep.add_argument(
        "--output", default=None, help="override the CSV output path"
    )

    p_plot = sub.add_parser("plot", help="render a sweep CSV as an SVG plot")
    p_plot.add_argument("csv", help="sweep CSV produced by the sweep command")
    p_plot.add_argument("out", help="output SVG path")

    p_validate = sub.add_parser("validate", help="validate a sweep configuration")
    p_validate.add_argument("config", help="path to the YAML sweep configuration")

    p_cache = sub.add_parser("cache", help="matrix cache maintenance")
    p_cache.add_argument("action", choices=["clear"])
    p_cache.add_argument(
        "--dir", default=".holomimo_cache", help="cache directory to operate on"
    )
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            cfg = parse_config(Path(args.config).read_text())
            rows = run_sweep(cfg, csv_path=args.output)
            failed = sum(1 for r in rows if r.error is not None)
            out = args.output or cfg.output
            print(f"wrote {len(rows)} rows to {out}" + (
                f" ({failed} failed)" if failed else ""
            ))
            if failed == len(rows):
                raise ValidationError("every sweep point failed")
        elif args.command == "plot":
            rows = read_csv_rows(args.csv)
            emit_plot(rows, args.out)
            print(f"wrote {args.out}")
        elif args.command == "validate":
            cfg = parse_config(Path(args.config).read_text())
            scenario, _ = scenario_for(cfg, cfg.values[0])
            validate_scenario(scenario)
            print(
                f"ok: {cfg.user_count} users, axis {cfg.axis} with "
                f"{len(cfg.values)} values, schemes {', '.join(cfg.schemes)}"
            )
        elif args.command == "cache":
            removed = MatrixCache(args.dir).clear()
            print(f"removed {removed} cached matrices from {args.dir}")
    except HoloMimoError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
