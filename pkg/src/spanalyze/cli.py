"""Command-line interface.

    spanalyze <command> --config PATH [--window A:B] [--domain NAME]
              [--format graphml|dot|csv|json] [--out DIR]

Exit status: 0 success, 1 runtime or usage error, 2 missing upstream
artifact, 3 invalid configuration, 4 output directory locked.  Errors are
reported as a single ``spanalyze: error[<code>]: <message>`` line on stderr.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .pipeline import STAGES, MissingArtifact, Options, OutputLocked, Workspace, run_stage

EXIT_ERROR, EXIT_MISSING, EXIT_CONFIG, EXIT_LOCKED = 1, 2, 3, 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # single-line errors instead of usage dumps
        raise _UsageError(message)


def _window(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like 2008:2013, got {text!r}") from None
    if a > b:
        raise argparse.ArgumentTypeError(f"window start after end: {text!r}")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spanalyze", description="Coauthorship-network analysis of interdisciplinary research.")
    p.add_argument("command", choices=STAGES)
    p.add_argument("--config", required=True, help="run configuration (TOML)")
    p.add_argument("--window", type=_window, help="single window A:B instead of the configured windows")
    p.add_argument("--domain", "--net", dest="domain", help="restrict to one network (a domain or 'boundary')")
    p.add_argument("--format", dest="fmt", choices=("graphml", "dot", "csv", "json"), help="export format")
    p.add_argument("--out", help="output directory (overrides paths.output)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _fail(code: int, message: str) -> int:
    print(f"spanalyze: error[{code}]: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail(EXIT_ERROR, exc)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config field {exc}")
    ws = Workspace(cfg, args.out)
    opts = Options(args.window, args.domain, args.fmt)
    try:
        run_stage(ws, args.command, opts)
    except MissingArtifact as exc:
        return _fail(EXIT_MISSING, exc)
    except OutputLocked as exc:
        return _fail(EXIT_LOCKED, exc)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config field {exc}")
    except (ValueError, OSError, KeyError) as exc:
        return _fail(EXIT_ERROR, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
