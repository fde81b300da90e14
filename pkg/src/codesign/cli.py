"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 1 any other
error. Failures print one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import EXPERIMENTS, FORMATS, ConfigError, RunConfig, load_config
from .dp import NonMonotoneLoopError

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="codesign", description="Co-design under uncertainty: UAV experiments.")
    ap.add_argument("--experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="flat TOML run configuration (see docs/config.md)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--n", type=int, help="Monte Carlo samples")
    ap.add_argument("--out", help="output directory (default: $CODESIGN_OUT or ./results)")
    ap.add_argument("--format", dest="formats", help="comma-separated subset of " + ",".join(FORMATS))
    ap.add_argument("--workers", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    formats = tuple(f.strip() for f in args.formats.split(",")) if args.formats else None
    try:
        return base.with_overrides(experiment=args.experiment, seed=args.seed, n=args.n, out=args.out,
                                   formats=formats, workers=args.workers)
    except ConfigError as e:
        raise ConfigError(str(e).split(": ", 1)[-1], e.field, source="command line") from None


def _fail(code: int, kind: str, exc: BaseException, **extra) -> int:
    msg = {"error": kind, "type": type(exc).__name__, "message": str(exc), **extra}
    print(json.dumps(msg), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, "config", e, field=e.field, line=e.line, source=e.source)
    from .runner import run

    try:
        tables, written = run(cfg)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, "config", e, field=e.field, line=e.line, source=e.source)
    except (ArithmeticError, NonMonotoneLoopError, FloatingPointError) as e:
        return _fail(EXIT_NUMERIC, "numerical", e)
    except (ValueError, KeyError, OSError, RuntimeError, AssertionError) as e:
        return _fail(EXIT_ERROR, "run", e)
    for p in written:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
