"""Command-line entry point: ``boselab <experiment> [--config FILE] [--out DIR]``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from ..errors import BoseLabError, CapacityError, ConfigError, TruncationError
from .config import ExperimentConfig, load_config
from .output import build_manifest, write_csv, write_manifest
from .runners import RUNNERS

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_CONFIG = 3
EXIT_CAPACITY = 4

log = logging.getLogger("boselab")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boselab", description=__doc__)
    p.add_argument("command", choices=[*RUNNERS, "all"])
    p.add_argument("--config", type=Path, help="flat key = value configuration file")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes per sweep")
    p.add_argument("--seed", type=int, help="overrides init.seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    names = list(RUNNERS) if args.command == "all" else [args.command]
    results, config_echo, seed = [], {}, None
    status, error, code = "passed", None, EXIT_OK
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2 ** 64:
                raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
            cfg.set("init.seed", args.seed)
        if args.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {args.workers}")
        config_echo, seed = cfg.to_dict(), cfg["init.seed"]
        for name in names:
            start = time.perf_counter()
            res = RUNNERS[name](cfg, workers=args.workers, out_dir=out)
            res.wall_times["total"] = time.perf_counter() - start
            write_csv(out / f"{name}.csv", res.columns, res.rows)
            results.append(res)
            for chk in res.checks:
                log.info("%s %s: %s %s", name, chk.name, "pass" if chk.passed else "FAIL", chk.detail)
        if not all(r.passed for r in results):
            status, code = "failed", EXIT_CHECK_FAILED
            error = "; ".join(f"{r.name}:{c.name}" for r in results for c in r.checks if not c.passed)
    except ConfigError as exc:
        status, error, code = "error", f"configuration: {exc}", EXIT_CONFIG
    except (CapacityError, TruncationError) as exc:
        status, error, code = "error", f"{type(exc).__name__}: {exc}", EXIT_CAPACITY
    except BoseLabError as exc:
        status, error, code = "failed", f"{type(exc).__name__}: {exc}", EXIT_CHECK_FAILED
    manifest = build_manifest(args.command, config_echo, seed, results, status, error)
    write_manifest(out / "manifest.json", manifest)
    for r in results:
        print(f"{r.name}: {'pass' if r.passed else 'FAIL'}")
    if error:
        print(f"error: {error}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
