"""
End-to-end run: ingest -> mine -> per-pair convergence and stationarity ->
per-proposal reports, a cross-proposal summary and plot data.

Outputs under <output_dir>/:
  reports.json                canonical reports + summary (no timestamps)
  manifest.json               run metadata, ingest summary, errors, generated_at
  <proposal>/rules.csv        LHS,RHS,support,confidence,count,week table
  <proposal>/pairs/pair_NNNN_support.csv          week, support, marker rows
  <proposal>/pairs/pair_NNNN_suffix_variance.csv  suffix statistic per start week
  <proposal>/pairs/pair_NNNN_adf.csv              per-offset ADF diagnostics
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import pytz

from tagtrend import convergence, stationarity
from tagtrend.config import RunConfig
from tagtrend.console import get_logger, ok
from tagtrend.convergence import ConvergenceResult
from tagtrend.errors import CommentParseError, ConfigError, EmptyTimelineError, TagFormatError, TagTrendError
from tagtrend.rulemine import Rule, SupportSeries, mine_timeline, series_for_pairs
from tagtrend.stationarity import StationarityScan
from tagtrend.tagstream import (build_timeline, default_epoch, filter_notes_boards, normalize_tag,
                                parse_comments, parse_seed_tags, seed_discussions, summarize_ingest)
from tools.data_tools import ensure_outdir, save_frame_csv, save_json, save_rule_table

log = get_logger(__name__)


# -----------------------------
# Report types
# -----------------------------
@dataclass(frozen=True)
class PairResult:
    series: SupportSeries
    convergence: Optional[ConvergenceResult] = None
    stationarity: Optional[StationarityScan] = None
    error: Optional[str] = None

    @property
    def rule(self) -> Rule:
        return self.series.rule

    def as_dict(self) -> dict:
        return {
            "LHS": self.rule.render_lhs(),
            "RHS": self.rule.render_rhs(),
            "first_week": self.series.first_week,
            "n_weeks": len(self.series),
            "convergence": self.convergence.as_dict() if self.convergence else None,
            "stationarity": self.stationarity.as_dict() if self.stationarity else None,
            "error": self.error,
        }


def _moments(values: Sequence[float]) -> Dict[str, Optional[float]]:
    """mean / median / sd (n-1 divisor); sd is absent below two values."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"mean": None, "median": None, "sd": None}
    return {
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "sd": float(arr.std(ddof=1)) if arr.size > 1 else None,
    }


def summarize_pairs(pairs: Sequence[PairResult]) -> dict:
    """
    Rates and onset moments recomputed from pair results. The convergence
    denominator is every series long enough for the detector; too-short and
    failed series are counted separately. Same for stationarity.
    """
    conv_ok = [p for p in pairs if p.convergence is not None and not p.convergence.too_short]
    conv_hit = [p.convergence for p in conv_ok if p.convergence.converged]
    stat_ok = [p for p in pairs if p.stationarity is not None and not p.stationarity.too_short]
    stat_hit = [p.stationarity for p in stat_ok if p.stationarity.stationary]
    conv_weeks = [c.weeks_before_submission for c in conv_hit]
    stat_weeks = [s.weeks_before_submission for s in stat_hit]
    return {
        "n_pairs": len(pairs),
        "n_errors": sum(1 for p in pairs if p.error),
        "convergence": {
            "n_analyzable": len(conv_ok),
            "n_too_short": sum(1 for p in pairs if p.convergence is not None and p.convergence.too_short),
            "n_converged": len(conv_hit),
            "n_starts_at_first": sum(1 for c in conv_hit if c.starts_at_first),
            "rate": len(conv_hit) / len(conv_ok) if conv_ok else None,
            "weeks_before_submission": _moments(conv_weeks),
        },
        "stationarity": {
            "n_analyzable": len(stat_ok),
            "n_too_short": sum(1 for p in pairs if p.stationarity is not None and p.stationarity.too_short),
            "n_stationary": len(stat_hit),
            "rate": len(stat_hit) / len(stat_ok) if stat_ok else None,
            "weeks_before_submission": _moments(stat_weeks),
        },
    }


@dataclass(frozen=True)
class ProposalReport:
    proposal_id: str
    submission_week: int
    pair_results: Tuple[PairResult, ...]
    error: Optional[str] = None

    @property
    def n_pairs(self) -> int:
        return len(self.pair_results)

    @property
    def summary(self) -> dict:
        return summarize_pairs(self.pair_results)

    @property
    def convergence_rate(self) -> Optional[float]:
        return self.summary["convergence"]["rate"]

    @property
    def stationary_rate(self) -> Optional[float]:
        return self.summary["stationarity"]["rate"]

    def as_dict(self) -> dict:
        return {
            "proposal_id": self.proposal_id,
            "submission_week": self.submission_week,
            "error": self.error,
            "summary": self.summary,
            "pairs": [p.as_dict() for p in self.pair_results],
        }


@dataclass(frozen=True)
class GlobalSummary:
    n_proposals: int
    stats: dict = field(default_factory=dict)

    @property
    def convergence_rate(self) -> Optional[float]:
        return self.stats["convergence"]["rate"]

    @property
    def stationary_rate(self) -> Optional[float]:
        return self.stats["stationarity"]["rate"]

    def as_dict(self) -> dict:
        return {"n_proposals": self.n_proposals, **self.stats}


def aggregate(reports: Sequence[ProposalReport]) -> GlobalSummary:
    """Pool every pair result across proposals."""
    if not reports:
        raise ValueError("aggregate needs at least one report")
    pairs = [p for r in reports for p in r.pair_results]
    return GlobalSummary(n_proposals=len(reports), stats=summarize_pairs(pairs))


# -----------------------------
# Pair analysis
# -----------------------------
def analyze_pair(series: SupportSeries, alpha: float = 0.05,
                 lags: Union[str, int] = "auto") -> PairResult:
    try:
        conv = convergence.analyze_series(series, alpha=alpha)
        stat = stationarity.analyze_series(series, alpha=alpha, lags=lags)
    except (TagTrendError, ValueError, np.linalg.LinAlgError) as e:
        return PairResult(series=series, error=f"{type(e).__name__}: {e}")
    return PairResult(series=series, convergence=conv, stationarity=stat)


def _analyze_job(job: Tuple[SupportSeries, float, Union[str, int]]) -> PairResult:
    series, alpha, lags = job
    return analyze_pair(series, alpha, lags)


def analyze_pairs(series_list: Sequence[SupportSeries], alpha: float = 0.05,
                  lags: Union[str, int] = "auto", workers: int = 1) -> List[PairResult]:
    """Results come back in input order whatever the worker count."""
    jobs = [(s, alpha, lags) for s in series_list]
    if workers <= 1 or len(jobs) < 2:
        return [_analyze_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_analyze_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# -----------------------------
# Plot data
# -----------------------------
def emit_plot_data(series: SupportSeries, result: PairResult, outdir: str, stem: str) -> Dict[str, str]:
    """
    Write <stem>_support.csv (week, support, marker) with marker rows at the
    convergence and stationarity onset weeks, <stem>_suffix_variance.csv and,
    when a scan ran, <stem>_adf.csv.
    """
    ensure_outdir(outdir)
    weeks = list(series.weeks)
    rows = [{"week": w, "support": v, "marker": ""} for w, v in zip(weeks, series.values)]
    conv, stat = result.convergence, result.stationarity
    if conv is not None and conv.converged:
        rows.append({"week": conv.start_week,
                     "support": series.values[conv.start_week - series.first_week],
                     "marker": "convergence_onset"})
    if stat is not None and stat.stationary:
        rows.append({"week": stat.start_week,
                     "support": series.values[stat.start_week - series.first_week],
                     "marker": "stationarity_onset"})
    paths = {"support": save_frame_csv(pd.DataFrame(rows, columns=["week", "support", "marker"]),
                                       os.path.join(outdir, f"{stem}_support.csv"))}

    if conv is not None and conv.suffix_stats:
        df = pd.DataFrame({"week": weeks[: len(conv.suffix_stats)],
                           f"suffix_{conv.statistic}": list(conv.suffix_stats)})
        paths["suffix_variance"] = save_frame_csv(df, os.path.join(outdir, f"{stem}_suffix_variance.csv"))

    if stat is not None and stat.per_offset_results:
        df = pd.DataFrame([{"offset": k, "week": series.first_week + k - 1, **r.as_dict()}
                           for k, r in enumerate(stat.per_offset_results, start=1)])
        paths["adf"] = save_frame_csv(df, os.path.join(outdir, f"{stem}_adf.csv"))
    return paths


# -----------------------------
# Main processing
# -----------------------------
def safe_name(pid: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in pid) or "proposal"


def run(config: RunConfig, write: bool = True) -> List[ProposalReport]:
    """
    Process every proposal in the seeds file. Missing or malformed inputs
    raise CommentParseError; problems with one proposal or one pair are
    recorded in its report and the run goes on.
    """
    for path in (config.comments, config.seeds):
        if not os.path.isfile(path):
            raise CommentParseError(f"input file not found: {path}")

    parsed = parse_comments(config.comments)
    for e in parsed.errors:
        log.warning("comments line %d: %s", e.line, e.message)
    comments = parsed.comments
    if config.notes_boards is not None:
        comments = filter_notes_boards(comments, config.notes_boards)

    epoch = config.epoch_date or (default_epoch(parsed.comments) if parsed.comments else
                                  pytz.utc.localize(datetime(1970, 1, 5)))
    seed_sets = parse_seed_tags(config.seeds, epoch)
    if not seed_sets:
        log.warning("No proposals in %s; nothing to analyze", config.seeds)

    excluded = []
    for t in config.exclude_tags:
        try:
            excluded.append(normalize_tag(t if t.startswith("#") else "#" + t))
        except TagFormatError as e:
            raise ConfigError(str(e)) from e

    reports: List[ProposalReport] = []
    rule_rows: Dict[str, list] = {}
    for seeds in seed_sets:
        pid = seeds.proposal_id
        discussions = seed_discussions(comments, seeds)
        try:
            timeline = build_timeline(comments, discussions, seeds.submission_week, epoch,
                                      proposal_id=pid, unit=config.transaction_unit)
        except EmptyTimelineError as e:
            log.warning("%s", e)
            reports.append(ProposalReport(pid, seeds.submission_week, (), error=str(e)))
            continue

        rule_rows[pid] = mine_timeline(timeline, config.min_support, config.min_confidence)
        series = series_for_pairs(timeline, config.min_support, config.min_confidence, exclude_tags=excluded)
        pairs = analyze_pairs(series, alpha=config.alpha, lags=config.lags, workers=config.workers)
        for p in pairs:
            if p.error:
                log.warning("%s %s: %s", pid, p.rule, p.error)
        report = ProposalReport(pid, seeds.submission_week, tuple(pairs))
        reports.append(report)
        s = report.summary
        ok(log, "%s: %d pairs, %s converged, %s stationary", pid, report.n_pairs,
           s["convergence"]["n_converged"], s["stationarity"]["n_stationary"])

    if write:
        write_outputs(config, reports, rule_rows, summarize_ingest(parsed, comments), epoch)
    return reports


def canonical_payload(reports: Sequence[ProposalReport]) -> dict:
    return {
        "summary": aggregate(reports).as_dict() if reports else None,
        "proposals": [r.as_dict() for r in reports],
    }


def write_outputs(config: RunConfig, reports: Sequence[ProposalReport], rule_rows: Dict[str, list],
                  ingest: dict, epoch: datetime) -> Dict[str, str]:
    out = config.output_dir
    ensure_outdir(out)
    for r in reports:
        pdir = os.path.join(out, safe_name(r.proposal_id))
        if r.proposal_id in rule_rows:
            save_rule_table(rule_rows[r.proposal_id], os.path.join(pdir, "rules.csv"))
        for i, pair in enumerate(r.pair_results, start=1):
            emit_plot_data(pair.series, pair, os.path.join(pdir, "pairs"), f"pair_{i:04d}")

    reports_path = save_json(canonical_payload(reports), os.path.join(out, "reports.json"))
    manifest = {
        "generated_at": datetime.now(pytz.utc).isoformat(),
        "inputs": {"comments": config.comments, "seeds": config.seeds},
        "epoch": epoch.isoformat(),
        "settings": {
            "notes_boards": config.notes_boards,
            "transaction_unit": config.transaction_unit,
            "min_support": config.min_support,
            "min_confidence": config.min_confidence,
            "alpha": config.alpha,
            "lags": config.lags,
            "exclude_tags": config.exclude_tags,
        },
        "ingest": ingest,
        "n_proposals": len(reports),
        "errors": [{"proposal_id": r.proposal_id, "error": r.error} for r in reports if r.error],
        "reports": os.path.relpath(reports_path, out),
    }
    manifest_path = save_json(manifest, os.path.join(out, "manifest.json"))
    ok(log, "reports -> %s", reports_path)
    return {"reports": reports_path, "manifest": manifest_path}


# -----------------------------
# Report rendering
# -----------------------------
REPORT_COLUMNS = [
    "proposal_id", "LHS", "RHS", "first_week", "n_weeks",
    "converged", "convergence_start_week", "convergence_weeks_before_submission", "starts_at_first",
    "stationary", "stationarity_start_week", "stationarity_weeks_before_submission",
    "too_short", "error",
]


def report_frame(payload: dict) -> pd.DataFrame:
    """One row per pair from a canonical reports.json payload."""
    rows = []
    for prop in payload.get("proposals", []):
        for pair in prop.get("pairs", []):
            conv = pair.get("convergence") or {}
            stat = pair.get("stationarity") or {}
            rows.append({
                "proposal_id": prop["proposal_id"],
                "LHS": pair["LHS"],
                "RHS": pair["RHS"],
                "first_week": pair["first_week"],
                "n_weeks": pair["n_weeks"],
                "converged": conv.get("converged"),
                "convergence_start_week": conv.get("start_week"),
                "convergence_weeks_before_submission": conv.get("weeks_before_submission"),
                "starts_at_first": conv.get("starts_at_first"),
                "stationary": stat.get("stationary"),
                "stationarity_start_week": stat.get("start_week"),
                "stationarity_weeks_before_submission": stat.get("weeks_before_submission"),
                "too_short": bool(conv.get("too_short")),
                "error": pair.get("error"),
            })
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)
