#!/usr/bin/env python3
"""
run.py: tag-pair association trends from weekly comment streams.

Subcommands:
  ingest        parse comments, print the ingest summary
  mine          write the weekly rule table (rules.csv) per proposal
  mk            Mann-Kendall test on a one-column series CSV
  converge      onset of convergence for one or more series CSVs
  stationarity  ADF forward scan for one or more series CSVs
  run           full pipeline from a JSON config
  synth         write a synthetic series CSV
  power         power study of the convergence detector
  report        re-render a finished run as JSON or CSV
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import List, Optional

import pandas as pd

from tagtrend import convergence, mktrend, pipeline, stationarity, synthbench
from tagtrend.config import DEFAULT_MIN_CONFIDENCE, DEFAULT_MIN_SUPPORT, RunConfig, config_from_dict, load_config, parse_lags
from tagtrend.console import get_logger, ok, setup_console
from tagtrend.errors import TagTrendError
from tagtrend.rulemine import mine_timeline
from tagtrend.tagstream import (build_timeline, default_epoch, filter_notes_boards, parse_comments,
                                parse_seed_tags, seed_discussions, summarize_ingest)
from tools.data_tools import canonical_json, ensure_outdir, read_numeric_column, save_frame_csv, save_json, save_rule_table

log = get_logger("run")


# -----------------------------
# Helpers
# -----------------------------
def _csv_list(s: Optional[str]) -> List[str]:
    return [x.strip() for x in (s or "").split(",") if x.strip()]


def _emit(payload, out: Optional[str]) -> None:
    if out:
        save_json(payload, out)
        ok(log, "-> %s", out)
    else:
        sys.stdout.write(canonical_json(payload))


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _config(args) -> RunConfig:
    """--config (or TAGTREND_CONFIG) first; --comments/--seeds build one ad hoc."""
    if getattr(args, "comments", None) and getattr(args, "seeds", None) and not args.config:
        cfg = config_from_dict({"comments": args.comments, "seeds": args.seeds})
    else:
        cfg = load_config(args.config)
    over = {}
    if getattr(args, "min_support", None) is not None:
        over["min_support"] = args.min_support
    if getattr(args, "min_confidence", None) is not None:
        over["min_confidence"] = args.min_confidence
    if getattr(args, "alpha", None) is not None:
        over["alpha"] = args.alpha
    if getattr(args, "lags", None) is not None:
        over["lags"] = parse_lags(args.lags)
    if getattr(args, "exclude_tags", None):
        over["exclude_tags"] = _csv_list(args.exclude_tags)
    if getattr(args, "workers", None) is not None:
        over["workers"] = args.workers
    if getattr(args, "output_dir", None):
        over["output_dir"] = args.output_dir
    return replace(cfg, **over) if over else cfg


# -----------------------------
# Subcommands
# -----------------------------
def cmd_ingest(args) -> int:
    parsed = parse_comments(args.comments)
    kept = parsed.comments
    boards = _csv_list(args.notes_boards)
    if boards:
        kept = filter_notes_boards(kept, boards)
    _emit(summarize_ingest(parsed, kept), args.out)
    return 0


def cmd_mine(args) -> int:
    cfg = _config(args)
    parsed = parse_comments(cfg.comments)
    comments = parsed.comments if cfg.notes_boards is None else filter_notes_boards(parsed.comments, cfg.notes_boards)
    epoch = cfg.epoch_date or default_epoch(parsed.comments)
    for seeds in parse_seed_tags(cfg.seeds, epoch):
        try:
            timeline = build_timeline(comments, seed_discussions(comments, seeds), seeds.submission_week,
                                      epoch, proposal_id=seeds.proposal_id, unit=cfg.transaction_unit)
        except TagTrendError as e:
            log.warning("%s", e)
            continue
        rows = mine_timeline(timeline, cfg.min_support, cfg.min_confidence)
        path = save_rule_table(rows, os.path.join(cfg.output_dir, pipeline.safe_name(seeds.proposal_id), "rules.csv"))
        ok(log, "%s: %d rule rows -> %s", seeds.proposal_id, len(rows), path)
    return 0


def cmd_mk(args) -> int:
    values = read_numeric_column(args.series)
    _emit(mktrend.mk_test(values, alpha=args.alpha).as_dict(), args.out)
    return 0


def cmd_converge(args) -> int:
    results = {}
    for path in args.series:
        values = read_numeric_column(path)
        res = convergence.find_converge_start(values, alpha=args.alpha, statistic=args.statistic)
        results[path] = res.as_dict()
        if args.out_dir and res.suffix_stats:
            df = pd.DataFrame({"index": range(1, len(res.suffix_stats) + 1),
                               f"suffix_{res.statistic}": list(res.suffix_stats)})
            save_frame_csv(df, os.path.join(args.out_dir, f"{_stem(path)}_suffix_{res.statistic}.csv"))
            save_json(results[path], os.path.join(args.out_dir, f"{_stem(path)}_convergence.json"))
    _emit(results, None if args.out_dir else args.out)
    return 0


def cmd_stationarity(args) -> int:
    lags = parse_lags(args.lags)
    results = {}
    for path in args.series:
        values = read_numeric_column(path)
        scan = stationarity.find_stationarity_start(values, alpha=args.alpha, lags=lags)
        results[path] = scan.as_dict()
        if args.out_dir and scan.per_offset_results:
            df = pd.DataFrame([{"offset": k, **r.as_dict()}
                               for k, r in enumerate(scan.per_offset_results, start=1)])
            save_frame_csv(df, os.path.join(args.out_dir, f"{_stem(path)}_adf.csv"))
            save_json(results[path], os.path.join(args.out_dir, f"{_stem(path)}_stationarity.json"))
    _emit(results, None if args.out_dir else args.out)
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    reports = pipeline.run(cfg)
    if reports:
        summary = pipeline.aggregate(reports).as_dict()
        ok(log, "%d proposals, %d pairs -> %s", len(reports), summary["n_pairs"], cfg.output_dir)
    return 0


def _synth_spec(args, kind: Optional[str] = None, seed: Optional[int] = None) -> synthbench.SynthSpec:
    return synthbench.SynthSpec(
        kind=kind or args.kind,
        length=args.length,
        seed=args.seed if seed is None else seed,
        change_point=args.change_point,
        noise_scale=args.noise_scale,
        decay=args.decay,
        mu=args.mu,
    )


def cmd_synth(args) -> int:
    series = synthbench.generate(_synth_spec(args))
    df = pd.DataFrame({"value": list(series.values)})
    if args.out:
        save_frame_csv(df, args.out)
        ok(log, "%s series (%d points) -> %s", args.kind, len(series), args.out)
    else:
        df.to_csv(sys.stdout, index=False, lineterminator="\n")
    return 0


def cmd_power(args) -> int:
    planted = _synth_spec(args, kind="two-phase-variance")
    null = _synth_spec(args, kind="iid-noise", seed=args.seed + args.trials)
    null = replace(null, change_point=None)
    report = synthbench.power_study(args.trials, planted, null, alpha=args.alpha)
    _emit(report.as_dict(), args.out)
    return 0


def cmd_report(args) -> int:
    src = args.run
    if os.path.isdir(src):
        src = os.path.join(src, "reports.json")
    if not os.path.isfile(src):
        raise SystemExit(f"No reports.json at {args.run}")
    with open(src, encoding="utf-8") as f:
        payload = json.load(f)

    if args.format == "json":
        _emit(payload, args.out)
        return 0
    df = pipeline.report_frame(payload)
    if args.out:
        save_frame_csv(df, args.out)
        ok(log, "%d pair rows -> %s", len(df), args.out)
    else:
        df.to_csv(sys.stdout, index=False, lineterminator="\n")
    return 0


# -----------------------------
# Argument parsing
# -----------------------------
def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON run config (default: TAGTREND_CONFIG from .env)")
    p.add_argument("--comments", type=str, default=None, help="Comments CSV (used without --config)")
    p.add_argument("--seeds", type=str, default=None, help="Seed tags CSV (used without --config)")
    p.add_argument("--output-dir", type=str, default=None, help="Override output directory")
    p.add_argument("--exclude-tags", type=str, default=None, help="Comma-separated tags whose rules are dropped")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Tag-pair association trends: convergence and stationarity onsets")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="Parse comments and print the ingest summary")
    p.add_argument("--comments", type=str, required=True)
    p.add_argument("--notes-boards", type=str, default=None, help="Comma-separated Notes board ids")
    p.add_argument("--out", type=str, default=None, help="Write the summary JSON here instead of stdout")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mine", help="Write weekly rule tables per proposal")
    _add_config_args(p)
    p.add_argument("--min-support", type=float, default=None, help=f"default {DEFAULT_MIN_SUPPORT}")
    p.add_argument("--min-confidence", type=float, default=None, help=f"default {DEFAULT_MIN_CONFIDENCE}")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("mk", help="Mann-Kendall test on a series CSV")
    p.add_argument("series", type=str)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_mk)

    p = sub.add_parser("converge", help="Onset of convergence for series CSVs")
    p.add_argument("series", nargs="+")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--statistic", choices=convergence.STATISTICS, default="variance")
    p.add_argument("--out", type=str, default=None, help="Write all results to one JSON file")
    p.add_argument("--out-dir", type=str, default=None, help="Per-series JSON and suffix CSVs")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("stationarity", help="ADF forward scan for series CSVs")
    p.add_argument("series", nargs="+")
    p.add_argument("--alpha", type=float, default=0.05, choices=sorted(stationarity.DF_CRITICAL_VALUES))
    p.add_argument("--lags", type=str, default="auto", help="auto | schwert | aic | integer")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--out-dir", type=str, default=None, help="Per-series JSON and per-offset ADF CSVs")
    p.set_defaults(func=cmd_stationarity)

    p = sub.add_parser("run", help="Full pipeline from a JSON config")
    _add_config_args(p)
    p.add_argument("--workers", type=int, default=None, help="Processes for per-pair analysis")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="Write a synthetic series CSV")
    p.add_argument("--kind", choices=synthbench.KINDS, required=True)
    p.add_argument("--out", type=str, default=None)
    for q in (p, sub.add_parser("power", help="Power study of the convergence detector")):
        q.add_argument("--length", type=int, default=150)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--change-point", type=int, default=None)
        q.add_argument("--noise-scale", type=float, default=1.0)
        q.add_argument("--decay", type=float, default=0.9)
        q.add_argument("--mu", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)
    p = sub.choices["power"]
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_power, change_point=60)

    p = sub.add_parser("report", help="Re-render a finished run")
    p.add_argument("run", type=str, help="Run output directory or its reports.json")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_console(verbose=args.verbose)
    if getattr(args, "out_dir", None):
        ensure_outdir(args.out_dir)
    try:
        return args.func(args)
    except TagTrendError as e:
        log.error("%s", e)
        raise SystemExit(f"{type(e).__name__}: {e}")
    except (FileNotFoundError, ValueError) as e:
        log.error("%s", e)
        raise SystemExit(str(e))


if __name__ == "__main__":
    sys.exit(main())
