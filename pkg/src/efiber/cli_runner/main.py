"""Command-line entry point: ``efiber <subcommand> --config cfg.json --out dir``."""
from __future__ import annotations

import argparse
import concurrent.futures
import logging
import os
import sys

from .config import PRESETS, ConfigError, load_config, load_preset, normalize, save_config, set_field
from .pipeline import SUMMARY_COLUMNS, RunContext, StageError, run_scenario, summarize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4

SUBCOMMANDS = ("bands", "trap", "coupling", "dynamics", "cavity", "sweep", "validate")
SWEEP_COLUMNS = ("index", "value", "status", "error_code", "error")

log = logging.getLogger("efiber")


def _sweep_point(args):
    cfg, stage, out_dir = args
    try:
        _, out = run_scenario(cfg, out_dir, stage)
    except StageError as exc:
        code = EXIT_CONFIG if isinstance(exc.cause, (ConfigError, KeyError)) else EXIT_NUMERIC
        return "error", code, str(exc), {}
    return "ok", EXIT_OK, "", summarize(stage, out)


def sweep(cfg, out_dir, jobs=1, defaults=()):
    """Independent runs over ``sweep.values`` of ``sweep.axis``; one aggregated CSV.

    Returns the rows and whether every point succeeded. Points run in a
    process pool bounded by ``jobs``; the CSV is written by the caller's
    process only, in the order of the values.
    """
    spec = cfg["sweep"]
    stage = spec["stage"]
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    tasks, pre = [], {}
    for i, v in enumerate(spec["values"]):
        try:
            point, _ = normalize(set_field(base, spec["axis"], v))
        except ConfigError as exc:
            pre[i] = ("error", EXIT_CONFIG, str(exc), {})
            continue
        tasks.append((i, (point, stage, os.path.join(out_dir, f"point_{i:03d}"))))
    results = dict(pre)
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            for (i, _), res in zip(tasks, pool.map(_sweep_point, [t for _, t in tasks])):
                results[i] = res
    else:
        for i, t in tasks:
            results[i] = _sweep_point(t)
    metrics = SUMMARY_COLUMNS[stage]
    rows = []
    for i, v in enumerate(spec["values"]):
        status, code, msg, summ = results[i]
        rows.append((str(i), v, status, str(code), msg.replace(",", ";").replace("\n", " "),
                     *[summ.get(m, float("nan")) for m in metrics]))
    ctx = RunContext(out_dir, cfg, defaults)
    ctx.enter("sweep")
    ctx.write_csv("sweep.csv", (*SWEEP_COLUMNS, *metrics), rows)
    ok = all(r[2] == "ok" for r in rows)
    ctx.manifest("ok" if ok else "partial")
    return rows, ok


def build_parser():
    p = argparse.ArgumentParser(prog="efiber", description="Free-electron photonics scenarios.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name, help=f"run the {name} stage")
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="scenario JSON file")
        src.add_argument("--seed-preset", choices=PRESETS, help="bundled scenario")
        s.add_argument("--out", default="efiber_out", help="output directory")
        s.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, defaults = load_config(args.config) if args.config else load_preset(args.seed_preset)
        if args.jobs < 1:
            raise ConfigError("--jobs: must be at least 1 (constraint: minimum)")
        if args.command == "sweep" and "sweep" not in cfg:
            raise ConfigError("sweep: block required for the sweep subcommand (constraint: required)")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    save_config(os.path.join(args.out, "config.normalized.json"), cfg)
    if args.command == "sweep":
        rows, ok = sweep(cfg, args.out, args.jobs, defaults)
        for r in rows:
            print(f"point {r[0]} value={r[1]} {r[2]}" + (f" ({r[4]})" if r[2] != "ok" else ""))
        return EXIT_OK if ok else EXIT_PARTIAL
    try:
        ctx, out = run_scenario(cfg, args.out, args.command, defaults)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (ConfigError, KeyError)):
            return EXIT_CONFIG
        return EXIT_NUMERIC
    for k, v in summarize(args.command, out).items():
        print(f"{k} = {v:.6g}")
    print(f"wrote {len(ctx.files)} files to {args.out} (config {ctx.hash[:12]})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
