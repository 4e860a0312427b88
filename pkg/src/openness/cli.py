"""Command line entry point: ``openness {compute,analyze,funnel,render}``.

Exit codes: 0 success (per-property failures included), 1 usage or
configuration error, 2 I/O error on a required input.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .analytics.funnel import default_predicates, run_funnel
from .analytics.records import RecordError, load_metadata
from .analytics.table import TableError
from .config import ConfigError, load_config
from .masks import MaskError
from .pipeline import PropertyFailure, run_analytics, run_compute, run_render

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2

log = logging.getLogger("openness")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="openness", description="Spatial openness indicators for housing plans and interiors.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", required=True, help="key = value run configuration")
        p.add_argument("--grid-interval-m", type=float, default=None, help="grid spacing in metres (0.20)")
        p.add_argument("--min-year", type=int, default=None, help="earliest construction year kept (1960)")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")

    common(sub.add_parser("compute", help="per-property 2D/3D indicators, heatmaps, manifest"))
    p = sub.add_parser("analyze", help="trend, regional and correlation tables")
    common(p)
    p.add_argument("--metrics", default=None, help="metrics table (default OUT/metrics.csv)")
    common(sub.add_parser("funnel", help="print the filtering funnel only"))
    p = sub.add_parser("render", help="heatmap for one property")
    common(p)
    p.add_argument("--property-id", required=True)
    p.add_argument("--png", default=None, help="output image (default OUT/heatmaps/ID.png)")
    return parser


def _config(args):
    return load_config(
        args.config,
        grid_interval_m=args.grid_interval_m,
        min_year=args.min_year,
        workers=args.workers,
        out=args.out,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _config(args)
        if args.command == "compute":
            res = run_compute(cfg)
            print(res.funnel.describe())
            print(f"computed {len(res.metrics)} properties, {len(res.errors)} failed -> {cfg.out}")
            if res.errors:
                print(f"warning: {len(res.errors)} properties failed, see errors.csv", file=sys.stderr)
        elif args.command == "analyze":
            for path in run_analytics(cfg, args.metrics):
                print(path)
        elif args.command == "funnel":
            records = load_metadata(cfg.metadata)
            _, report = run_funnel(records, default_predicates(cfg.min_year, cfg.regions))
            print(report.describe())
        elif args.command == "render":
            print(run_render(cfg, args.property_id, args.png))
    except (ConfigError, RecordError, TableError, MaskError, PropertyFailure, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
