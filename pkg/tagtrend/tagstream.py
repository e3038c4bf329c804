"""
Comment ingest: parse the comments CSV, normalize hashtags, select the
discussions touched by a proposal's seed tags and build cumulative weekly
transaction snapshots.

Input schema (header row required):
  comment_id, board_id, discussion_id, user, posted_at, body
or the same with a pre-split `tags` column instead of (or besides) `body`.

Weeks are floor((posted_at - epoch) / 7 days). The default epoch is the
Monday 00:00 UTC on or before the earliest comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import pandas as pd
from dateutil.parser import isoparse

from tagtrend.config import to_utc
from tagtrend.console import get_logger
from tagtrend.errors import CommentParseError, ConfigError, EmptyTimelineError, TagFormatError
from tools.data_tools import read_csv_auto

log = get_logger(__name__)

REQUIRED_COLUMNS = ("comment_id", "board_id", "discussion_id", "user", "posted_at")
SEED_COLUMNS = ("proposal_id", "submission_date", "seed_tag")
TRAILING_PUNCT = ".,;:!?"
HASHTAG_RE = re.compile(r"#[^\s#]+")
TAG_SPLIT_RE = re.compile(r"[\s,;|]+")
WEEK = timedelta(days=7)


# -----------------------------
# Domain types
# -----------------------------
@dataclass(frozen=True)
class Comment:
    comment_id: str
    board_id: str
    discussion_id: str
    user: str
    posted_at: datetime
    tags: Tuple[str, ...] = ()


@dataclass(frozen=True)
class SeedTagSet:
    proposal_id: str
    submission_week: int
    seeds: FrozenSet[str]

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError(f"Proposal {self.proposal_id} has no seed tags")


@dataclass(frozen=True)
class Transaction:
    source_comment: str
    items: FrozenSet[str]

    def __post_init__(self):
        if not self.items:
            raise ValueError(f"Transaction {self.source_comment} has no items")


@dataclass(frozen=True)
class RowError:
    line: int
    field: str
    message: str


@dataclass
class ParsedComments:
    comments: List[Comment]
    errors: List[RowError] = field(default_factory=list)
    n_rows: int = 0


@dataclass(frozen=True)
class TransactionTimeline:
    """
    Cumulative weekly snapshots. `transactions` is ordered by week; the
    snapshot for weeks[i] is transactions[:cutoffs[i]].
    """
    proposal_id: str
    week_origin: int
    submission_week: int
    transactions: Tuple[Transaction, ...]
    transaction_weeks: Tuple[int, ...]
    cutoffs: Tuple[int, ...]

    @property
    def weeks(self) -> range:
        return range(self.week_origin, self.submission_week + 1)

    def snapshot(self, week: int) -> Tuple[Transaction, ...]:
        if week < self.week_origin:
            return ()
        i = min(week, self.submission_week) - self.week_origin
        return self.transactions[: self.cutoffs[i]]

    @property
    def snapshots(self) -> List[Tuple[int, Tuple[Transaction, ...]]]:
        return [(w, self.transactions[:c]) for w, c in zip(self.weeks, self.cutoffs)]

    def new_in_week(self, week: int) -> Tuple[Transaction, ...]:
        """Transactions whose week is exactly `week`."""
        i = week - self.week_origin
        lo = self.cutoffs[i - 1] if i > 0 else 0
        return self.transactions[lo: self.cutoffs[i]]

    def totals(self) -> List[int]:
        return list(self.cutoffs)


# -----------------------------
# Tags
# -----------------------------
def normalize_tag(raw_token: str) -> str:
    """Lowercase and strip trailing .,;:!? ; the token must start with '#'."""
    token = str(raw_token).strip()
    if not token.startswith("#"):
        raise TagFormatError(f"Not a hashtag: {raw_token!r}")
    tag = token.lower().rstrip(TRAILING_PUNCT)
    if len(tag) < 2:
        raise TagFormatError(f"Empty hashtag: {raw_token!r}")
    return tag


def _dedup(tags: Iterable[str]) -> Tuple[str, ...]:
    seen: Dict[str, None] = {}
    for t in tags:
        seen.setdefault(t, None)
    return tuple(seen)


def extract_tags(body: str) -> Tuple[str, ...]:
    """All hashtags in a comment body, normalized, first occurrence order."""
    out = []
    for tok in HASHTAG_RE.findall(body or ""):
        try:
            out.append(normalize_tag(tok))
        except TagFormatError:
            continue
    return _dedup(out)


def split_tag_cell(cell: str) -> Tuple[str, ...]:
    """Pre-split tags column; bare words are taken as tags without the '#'."""
    out = []
    for tok in TAG_SPLIT_RE.split(cell or ""):
        if not tok:
            continue
        try:
            out.append(normalize_tag(tok if tok.startswith("#") else "#" + tok))
        except TagFormatError:
            continue
    return _dedup(out)


# -----------------------------
# Parsing
# -----------------------------
def parse_timestamp(value: str) -> datetime:
    return to_utc(isoparse(str(value).strip()))


_LINE_RE = re.compile(r"line (\d+)")


def _read_table(csv_source, what: str) -> pd.DataFrame:
    try:
        return read_csv_auto(csv_source, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError as e:
        raise CommentParseError(f"{what} file not found: {csv_source}") from e
    except pd.errors.EmptyDataError as e:
        raise CommentParseError(f"{what} file is empty") from e
    except pd.errors.ParserError as e:
        m = _LINE_RE.search(str(e))
        raise CommentParseError(f"Malformed {what} CSV: {e}", line=int(m.group(1)) if m else None) from e


def parse_comments(csv_source) -> ParsedComments:
    """
    One Comment per row, input order preserved. Tags come from the `tags`
    column when present, otherwise from hashtags in `body`. Rows whose
    timestamp does not parse are reported in `errors` (line numbers count the
    header as line 1).
    """
    df = _read_table(csv_source, "comments")
    df.columns = [str(c).strip().lower() for c in df.columns]
    missing = [c for c in REQUIRED_COLUMNS if c not in df.columns]
    if missing:
        raise CommentParseError(f"comments CSV is missing columns: {', '.join(missing)}", line=1)
    has_tags = "tags" in df.columns
    if not has_tags and "body" not in df.columns:
        raise CommentParseError("comments CSV needs a 'body' or a 'tags' column", line=1)

    result = ParsedComments(comments=[], n_rows=len(df))
    for i, row in enumerate(df.itertuples(index=False)):
        line = i + 2
        rec = row._asdict()
        try:
            posted = parse_timestamp(rec["posted_at"])
        except (ValueError, OverflowError) as e:
            result.errors.append(RowError(line, "posted_at", f"bad timestamp {rec['posted_at']!r}: {e}"))
            continue
        tags = split_tag_cell(rec["tags"]) if has_tags else extract_tags(rec["body"])
        result.comments.append(Comment(
            comment_id=rec["comment_id"].strip(),
            board_id=rec["board_id"].strip(),
            discussion_id=rec["discussion_id"].strip(),
            user=rec["user"].strip(),
            posted_at=posted,
            tags=tags,
        ))
    return result


def parse_seed_tags(csv_source, epoch: datetime) -> List[SeedTagSet]:
    """
    Group seed rows by proposal. Every row of one proposal must carry the same
    submission date. Proposals come back sorted by id.
    """
    df = _read_table(csv_source, "seeds")
    df.columns = [str(c).strip().lower() for c in df.columns]
    missing = [c for c in SEED_COLUMNS if c not in df.columns]
    if missing:
        raise CommentParseError(f"seeds CSV is missing columns: {', '.join(missing)}", line=1)

    seeds: Dict[str, Set[str]] = {}
    weeks: Dict[str, int] = {}
    for i, row in enumerate(df.itertuples(index=False)):
        line = i + 2
        pid = row.proposal_id.strip()
        try:
            week = week_index(parse_timestamp(row.submission_date), epoch)
            tag = normalize_tag(row.seed_tag if row.seed_tag.strip().startswith("#") else "#" + row.seed_tag.strip())
        except (ValueError, OverflowError) as e:
            raise CommentParseError(f"Bad seed row: {e}", line=line) from e
        if pid in weeks and weeks[pid] != week:
            raise ConfigError(f"Proposal {pid} has conflicting submission dates (line {line})")
        weeks[pid] = week
        seeds.setdefault(pid, set()).add(tag)

    if not seeds:
        log.warning("Seeds file holds no proposals")
    return [SeedTagSet(pid, weeks[pid], frozenset(seeds[pid])) for pid in sorted(seeds)]


# -----------------------------
# Weeks
# -----------------------------
def default_epoch(comments: Sequence[Comment]) -> datetime:
    """Monday 00:00 UTC on or before the earliest comment."""
    if not comments:
        raise EmptyTimelineError("No comments to derive a week epoch from")
    first = min(c.posted_at for c in comments)
    day = first.replace(hour=0, minute=0, second=0, microsecond=0)
    return day - timedelta(days=day.weekday())


def week_index(ts: datetime, epoch: datetime) -> int:
    return (to_utc(ts) - to_utc(epoch)) // WEEK


# -----------------------------
# Selection
# -----------------------------
def filter_notes_boards(comments: Sequence[Comment], notes_board_ids: Iterable[str]) -> List[Comment]:
    boards = set(notes_board_ids)
    kept = [c for c in comments if c.board_id in boards]
    if not kept:
        log.warning("Notes-board filter kept no comments (%d board ids configured)", len(boards))
    return kept


def seed_discussions(comments: Iterable[Comment], seed_set: SeedTagSet) -> Set[str]:
    return {c.discussion_id for c in comments if not seed_set.seeds.isdisjoint(c.tags)}


def build_timeline(comments: Sequence[Comment],
                   discussion_ids: Iterable[str],
                   submission_week: int,
                   epoch: datetime,
                   proposal_id: str = "",
                   unit: str = "comment") -> TransactionTimeline:
    """
    Cumulative weekly timeline of tag-set transactions from the selected
    discussions, from the week of the first included comment through
    `submission_week`. Comments after the submission week are left out.

    unit="comment" makes one transaction per tag-bearing comment;
    unit="discussion-week" merges the tags of one discussion within one week.
    """
    wanted = set(discussion_ids)
    picked: List[Tuple[int, int, Comment]] = []
    for order, c in enumerate(comments):
        if c.discussion_id not in wanted or not c.tags:
            continue
        w = week_index(c.posted_at, epoch)
        if w > submission_week:
            continue
        picked.append((w, order, c))
    if not picked:
        raise EmptyTimelineError(f"Proposal {proposal_id or '?'}: no tag-bearing comments up to week {submission_week}")

    picked.sort(key=lambda t: (t[0], t[2].posted_at, t[1]))

    if unit == "comment":
        txns = [(w, Transaction(c.comment_id, frozenset(c.tags))) for w, _, c in picked]
    elif unit == "discussion-week":
        groups: Dict[Tuple[int, str], Set[str]] = {}
        for w, _, c in picked:
            groups.setdefault((w, c.discussion_id), set()).update(c.tags)
        txns = [(w, Transaction(f"{d}@{w}", frozenset(items))) for (w, d), items in groups.items()]
    else:
        raise ConfigError(f"Unknown transaction unit {unit!r}")

    origin = txns[0][0]
    t_weeks = [w for w, _ in txns]
    cutoffs = []
    j = 0
    for w in range(origin, submission_week + 1):
        while j < len(t_weeks) and t_weeks[j] <= w:
            j += 1
        cutoffs.append(j)

    return TransactionTimeline(
        proposal_id=proposal_id,
        week_origin=origin,
        submission_week=submission_week,
        transactions=tuple(t for _, t in txns),
        transaction_weeks=tuple(t_weeks),
        cutoffs=tuple(cutoffs),
    )


# -----------------------------
# Ingest summary
# -----------------------------
def summarize_ingest(parsed: ParsedComments, kept: Optional[Sequence[Comment]] = None) -> dict:
    kept = parsed.comments if kept is None else kept
    tags = [t for c in kept for t in c.tags]
    return {
        "n_rows": parsed.n_rows,
        "n_comments": len(parsed.comments),
        "n_row_errors": len(parsed.errors),
        "n_tagless": sum(1 for c in parsed.comments if not c.tags),
        "n_kept": len(kept),
        "n_kept_tagged": sum(1 for c in kept if c.tags),
        "n_tags": len(tags),
        "n_unique_tags": len(set(tags)),
        "row_errors": [{"line": e.line, "field": e.field, "message": e.message} for e in parsed.errors],
    }
