"""Command-line entry point: ``jittermon --scenario single-flow-90 --seeds 1..10``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from jittermon.config import ConfigError, load_config, parse_seeds
from jittermon.scenarios import (
    BUILTINS,
    FAMILIES,
    batch_trend_report,
    orderings_for,
    resolve,
    run_batch,
    write_run,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRENDS = 3

log = logging.getLogger("jittermon")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jittermon", description="Simulate jitter estimators and score them against ground truth.")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="YAML scenario file")
    src.add_argument("--scenario", help="built-in scenario or family name(s), comma separated")
    p.add_argument("--seeds", help="seed list, e.g. 1..10 or 1,4,7 (default: from config, else 1)")
    p.add_argument("--out", type=Path, help="output directory (default: config output_dir, else ./out)")
    p.add_argument("--assert-trends", action="store_true", help="exit 3 if any expected ordering fails")
    p.add_argument("--emit-events", action="store_true", help="write a per-packet events.txt for each run")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--duration-s", type=float, help="override simulated duration in seconds")
    p.add_argument("--list", action="store_true", help="list built-in scenarios and families")
    return p


def _list() -> str:
    lines = ["scenarios:"]
    for name, c in BUILTINS.items():
        parts = [f"{c.tagged.rate_bps / 1e6:g} Mbps", f"{c.duration_s:g} s"]
        if c.controller:
            parts.append(f"controller T={c.controller.interval_s:g} s")
        if c.dataplane:
            parts.append(f"dataplane n={c.dataplane.window} {','.join(c.dataplane.kinds)} @ {','.join(c.dataplane.switches)}")
        lines.append(f"  {name:<18} " + ", ".join(parts))
    lines.append("families:")
    for name, fam in FAMILIES.items():
        lines.append(f"  {name:<18} " + ", ".join(fam.scenarios))
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("JITTERMON_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = _parser().parse_args(argv)
    if args.list:
        sys.stdout.write(_list())
        return EXIT_OK
    try:
        if args.config is not None:
            cfg = load_config(args.config)
            configs = [cfg]
            seeds = list(cfg.seeds)
            out_dir = Path(cfg.output_dir)
        else:
            configs = resolve(args.scenario or "")
            if not configs:
                raise ConfigError("give --config or --scenario", "scenario")
            seeds = [1]
            out_dir = Path("out")
        if args.seeds is not None:
            try:
                seeds = parse_seeds(args.seeds)
            except ValueError as exc:
                raise ConfigError(str(exc), "seeds") from None
        if args.duration_s is not None:
            if args.duration_s <= 0:
                raise ConfigError("must be > 0", "duration_s")
            configs = [replace(c, duration_s=args.duration_s) for c in configs]
        if args.jobs < 1:
            raise ConfigError("must be >= 1", "jobs")
    except (ConfigError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        print(f"jittermon: config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out is not None:
        out_dir = args.out

    results = run_batch(configs, seeds, jobs=args.jobs, events=args.emit_events)
    # single collector: all files written here, after workers finish
    for r in results:
        d = write_run(r, out_dir)
        for v in r.violations:
            log.error("%s seed %d: %s", r.scenario, r.seed, v)
        log.info("wrote %s", d)

    report = batch_trend_report(results, orderings_for(c.name for c in configs))
    out_dir.mkdir(parents=True, exist_ok=True)
    text = report.format()
    (out_dir / "trend_report.txt").write_text(text)
    sys.stdout.write(text)
    if any(r.violations for r in results):
        print("jittermon: simulator invariant violations, see dtw_report.txt", file=sys.stderr)
    if args.assert_trends and not report.passed:
        return EXIT_TRENDS
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
