"""
Pairwise association rules over tag transactions.

Rules have at most one antecedent tag and exactly one consequent tag; the
empty antecedent ({ } -> {#tag}) is allowed. Weekly snapshots are cumulative,
so mining a whole timeline only needs running counts updated with each
week's new transactions.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Collection, Dict, Iterable, List, Optional, Sequence, Tuple

from tagtrend.errors import UndefinedMetricError
from tagtrend.tagstream import Transaction, TransactionTimeline


# -----------------------------
# Domain types
# -----------------------------
@dataclass(frozen=True, order=True)
class Rule:
    lhs: Tuple[str, ...]
    rhs: Tuple[str, ...]

    def __post_init__(self):
        if len(self.lhs) > 1 or len(self.rhs) != 1:
            raise ValueError(f"Only pairwise rules are supported: {self.lhs} -> {self.rhs}")
        if set(self.lhs) & set(self.rhs):
            raise ValueError(f"Antecedent and consequent overlap: {self.lhs} -> {self.rhs}")

    @classmethod
    def of(cls, lhs: Optional[str], rhs: str) -> "Rule":
        return cls(() if lhs is None else (lhs,), (rhs,))

    @property
    def itemset(self) -> frozenset:
        return frozenset(self.lhs + self.rhs)

    def tags(self) -> Tuple[str, ...]:
        return self.lhs + self.rhs

    @staticmethod
    def _render(side: Tuple[str, ...]) -> str:
        return "{" + side[0] + "}" if side else "{ }"

    def render_lhs(self) -> str:
        return self._render(self.lhs)

    def render_rhs(self) -> str:
        return self._render(self.rhs)

    def __str__(self) -> str:
        return f"{self.render_lhs()} -> {self.render_rhs()}"


def parse_rule_sides(lhs: str, rhs: str) -> Rule:
    """Inverse of render_lhs/render_rhs: '{#a}' / '{ }' strings back to a Rule."""
    def side(s: str) -> Tuple[str, ...]:
        inner = str(s).strip().strip("{}").strip()
        return (inner,) if inner else ()
    return Rule(side(lhs), side(rhs))


@dataclass(frozen=True)
class RuleSnapshot:
    rule: Rule
    support: float
    confidence: float
    lift: float
    count: int
    week: int


@dataclass(frozen=True)
class SupportSeries:
    proposal_id: str
    rule: Rule
    first_week: int
    submission_week: int
    values: Tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"Empty support series for {self.rule}")
        if len(self.values) != self.submission_week - self.first_week + 1:
            raise ValueError(
                f"Series for {self.rule} has {len(self.values)} values for weeks "
                f"{self.first_week}..{self.submission_week}"
            )

    @property
    def weeks(self) -> range:
        return range(self.first_week, self.submission_week + 1)

    def __len__(self) -> int:
        return len(self.values)


# -----------------------------
# Rule metrics
# -----------------------------
def support(itemset: Collection[str], transactions: Sequence[Transaction]) -> float:
    if not transactions:
        raise UndefinedMetricError("support is undefined over an empty transaction list")
    items = frozenset(itemset)
    hits = sum(1 for t in transactions if items <= t.items)
    return hits / len(transactions)


def confidence(rule: Rule, transactions: Sequence[Transaction]) -> float:
    s_lhs = support(rule.lhs, transactions)
    if s_lhs == 0:
        raise UndefinedMetricError(f"confidence of {rule} is undefined: antecedent never occurs")
    return support(rule.itemset, transactions) / s_lhs


def lift(rule: Rule, transactions: Sequence[Transaction]) -> float:
    s_rhs = support(rule.rhs, transactions)
    if s_rhs == 0:
        raise UndefinedMetricError(f"lift of {rule} is undefined: consequent never occurs")
    return confidence(rule, transactions) / s_rhs


def _check_thresholds(min_support: float, min_confidence: float) -> None:
    for name, v in (("min_support", min_support), ("min_confidence", min_confidence)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")


# -----------------------------
# Counting
# -----------------------------
class ItemCounter:
    """Running single-tag and tag-pair counts over a growing transaction set."""

    def __init__(self):
        self.total = 0
        self.singles: Counter = Counter()
        self.pairs: Counter = Counter()

    def add(self, transactions: Iterable[Transaction]) -> None:
        for t in transactions:
            self.total += 1
            items = sorted(t.items)
            self.singles.update(items)
            self.pairs.update(combinations(items, 2))

    def count(self, rule: Rule) -> int:
        if not rule.lhs:
            return self.singles[rule.rhs[0]]
        a, b = sorted((rule.lhs[0], rule.rhs[0]))
        return self.pairs[(a, b)]

    def snapshot(self, rule: Rule, week: int) -> RuleSnapshot:
        n = self.total
        c = self.count(rule)
        supp = c / n
        if not rule.lhs:
            return RuleSnapshot(rule, supp, supp, 1.0, c, week)
        c_lhs = self.singles[rule.lhs[0]]
        c_rhs = self.singles[rule.rhs[0]]
        conf = c / c_lhs
        return RuleSnapshot(rule, supp, conf, conf / (c_rhs / n), c, week)

    def candidate_rules(self) -> Iterable[Rule]:
        """Every rule whose itemset occurs at least once."""
        for tag in self.singles:
            yield Rule((), (tag,))
        for a, b in self.pairs:
            yield Rule((a,), (b,))
            yield Rule((b,), (a,))

    def qualifying(self, min_support: float, min_confidence: float, week: int) -> List[RuleSnapshot]:
        if self.total == 0:
            return []
        rows = []
        for rule in self.candidate_rules():
            snap = self.snapshot(rule, week)
            if snap.support >= min_support and snap.confidence >= min_confidence:
                rows.append(snap)
        rows.sort(key=lambda r: r.rule)
        return rows


# -----------------------------
# Mining
# -----------------------------
def mine_week(snapshot_transactions: Sequence[Transaction],
              min_support: float,
              min_confidence: float,
              week: int = 0) -> List[RuleSnapshot]:
    """
    All rules with |lhs| <= 1, |rhs| = 1 clearing both thresholds, ordered by
    (lhs, rhs) with the empty antecedent first. Rules whose itemset never
    occurs are not emitted.
    """
    _check_thresholds(min_support, min_confidence)
    counter = ItemCounter()
    counter.add(snapshot_transactions)
    return counter.qualifying(min_support, min_confidence, week)


def mine_timeline(timeline: TransactionTimeline,
                  min_support: float,
                  min_confidence: float) -> List[RuleSnapshot]:
    """Rule rows for every week of the timeline, week-major then (lhs, rhs)."""
    _check_thresholds(min_support, min_confidence)
    counter = ItemCounter()
    rows: List[RuleSnapshot] = []
    for week in timeline.weeks:
        counter.add(timeline.new_in_week(week))
        rows.extend(counter.qualifying(min_support, min_confidence, week))
    return rows


def series_for_pairs(timeline: TransactionTimeline,
                     min_support: float,
                     min_confidence: float,
                     exclude_tags: Collection[str] = ()) -> List[SupportSeries]:
    """
    One support series per rule that clears the thresholds in at least one
    week. A series starts at the rule's first qualifying week and records the
    rule's true support every week through the submission week, whether or
    not later weeks still clear the thresholds.
    """
    _check_thresholds(min_support, min_confidence)
    excluded = frozenset(exclude_tags)
    counter = ItemCounter()
    started: Dict[Rule, Tuple[int, List[float]]] = {}
    for week in timeline.weeks:
        counter.add(timeline.new_in_week(week))
        if counter.total == 0:
            continue
        for snap in counter.qualifying(min_support, min_confidence, week):
            if snap.rule not in started and excluded.isdisjoint(snap.rule.tags()):
                started[snap.rule] = (week, [])
        for rule, (_, values) in started.items():
            values.append(counter.count(rule) / counter.total)

    return [
        SupportSeries(
            proposal_id=timeline.proposal_id,
            rule=rule,
            first_week=first,
            submission_week=timeline.submission_week,
            values=tuple(values),
        )
        for rule, (first, values) in sorted(started.items())
    ]
