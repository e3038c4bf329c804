"""
Synthetic support-like series with planted structure, a power study for the
convergence detector, brute-force oracles, and a synthetic comment corpus
for end-to-end runs.

Random numbers come from numpy's Generator(PCG64(seed)), whose streams are
stable across platforms and numpy releases.

Kinds:
  iid-noise            x_t = mu + noise_scale * e_t
  random-walk          x_t = mu + noise_scale * (e_0 + ... + e_t)
  damped-oscillation   x_t = mu + noise_scale * decay^t * (-1)^t
  two-phase-variance   x_t = mu + e_t * s_t,  s_t = noise_scale before change_point,
                       noise_scale * decay^(t - change_point) from it on
  cumulative-support   x_t = count / T_t,  T_0 = initial_total,
                       T_t = T_{t-1} + Poisson(growth), clamped to [0, 1]
  walk-to-noise        random walk before change_point, iid noise around the
                       walk's last value from it on
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from typing import List, Optional, Sequence

import numpy as np
import pytz

from tagtrend.convergence import find_converge_start
from tagtrend.errors import ConfigError
from tagtrend.rulemine import Rule, SupportSeries

KINDS = ("iid-noise", "random-walk", "damped-oscillation", "two-phase-variance",
         "cumulative-support", "walk-to-noise")
NEEDS_CHANGE_POINT = ("two-phase-variance", "walk-to-noise")
MIN_POWER_TRIALS = 50


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    length: int
    seed: int = 0
    change_point: Optional[int] = None
    noise_scale: float = 1.0
    decay: float = 0.9
    mu: float = 0.0
    count: int = 1
    initial_total: int = 100
    growth: float = 20.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.length < 2:
            raise ConfigError(f"length must be >= 2, got {self.length}")
        if self.kind in NEEDS_CHANGE_POINT and self.change_point is None:
            raise ConfigError(f"{self.kind} needs a change_point")
        if self.change_point is not None and not 0 <= self.change_point < self.length:
            raise ConfigError(f"change_point must lie in [0, {self.length}), got {self.change_point}")
        if not self.noise_scale > 0:
            raise ConfigError(f"noise_scale must be positive, got {self.noise_scale}")
        if not 0 < self.decay <= 1:
            raise ConfigError(f"decay must lie in (0, 1], got {self.decay}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.kind == "cumulative-support":
            if self.count < 0 or self.initial_total < 1 or self.growth < 0:
                raise ConfigError("cumulative-support needs count >= 0, initial_total >= 1, growth >= 0")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def generate_values(spec: SynthSpec) -> np.ndarray:
    rng = rng_for(spec.seed)
    n = spec.length
    t = np.arange(n)

    if spec.kind == "iid-noise":
        return spec.mu + spec.noise_scale * rng.standard_normal(n)
    if spec.kind == "random-walk":
        return spec.mu + spec.noise_scale * np.cumsum(rng.standard_normal(n))
    if spec.kind == "damped-oscillation":
        return spec.mu + spec.noise_scale * spec.decay ** t * (-1.0) ** t
    if spec.kind == "two-phase-variance":
        cp = spec.change_point
        sigma = np.where(t < cp, spec.noise_scale,
                         spec.noise_scale * spec.decay ** np.maximum(t - cp, 0))
        return spec.mu + rng.standard_normal(n) * sigma
    if spec.kind == "cumulative-support":
        totals = spec.initial_total + np.concatenate([[0], np.cumsum(rng.poisson(spec.growth, n - 1))])
        return np.clip(spec.count / totals, 0.0, 1.0)
    # walk-to-noise
    cp = spec.change_point
    e = rng.standard_normal(n)
    walk = spec.mu + spec.noise_scale * np.cumsum(e[:cp])
    level = walk[-1] if cp > 0 else spec.mu
    return np.concatenate([walk, level + spec.noise_scale * e[cp:]])


def generate(spec: SynthSpec, first_week: int = 0, proposal_id: str = "synthetic") -> SupportSeries:
    values = generate_values(spec)
    return SupportSeries(
        proposal_id=proposal_id,
        rule=Rule((), (f"#{spec.kind}",)),
        first_week=first_week,
        submission_week=first_week + spec.length - 1,
        values=tuple(float(v) for v in values),
    )


# -----------------------------
# Power study
# -----------------------------
@dataclass(frozen=True)
class PowerReport:
    n_trials: int
    alpha: float
    detection_rate: float
    null_rate: float
    onset_errors: tuple
    planted_change_point: Optional[int]

    @property
    def margin(self) -> float:
        return self.detection_rate - self.null_rate

    @property
    def median_onset_error(self) -> Optional[float]:
        return float(np.median(self.onset_errors)) if self.onset_errors else None

    def as_dict(self) -> dict:
        errs = np.asarray(self.onset_errors, dtype=float)
        return {
            "n_trials": self.n_trials,
            "alpha": self.alpha,
            "detection_rate": self.detection_rate,
            "null_rate": self.null_rate,
            "margin": self.margin,
            "planted_change_point": self.planted_change_point,
            "onset_error": {
                "n": int(errs.size),
                "median": self.median_onset_error,
                "mean": float(errs.mean()) if errs.size else None,
                "sd": float(errs.std(ddof=1)) if errs.size > 1 else None,
                "min": float(errs.min()) if errs.size else None,
                "max": float(errs.max()) if errs.size else None,
            },
            "onset_errors": list(self.onset_errors),
        }


def power_study(n_trials: int, spec_planted: SynthSpec, spec_null: SynthSpec,
                alpha: float = 0.05) -> PowerReport:
    """
    Run the convergence detector on n_trials seeds (spec.seed + trial) of each
    spec. Onset error is the detected 0-based onset minus the planted change
    point, over detected planted trials.
    """
    if n_trials < MIN_POWER_TRIALS:
        raise ConfigError(f"power study needs at least {MIN_POWER_TRIALS} trials, got {n_trials}")

    hits = 0
    null_hits = 0
    errors: List[int] = []
    for trial in range(n_trials):
        planted = generate_values(replace(spec_planted, seed=(spec_planted.seed + trial) % 2 ** 64))
        res = find_converge_start(planted, alpha=alpha)
        if res.converged:
            hits += 1
            if spec_planted.change_point is not None:
                errors.append(res.start_index - 1 - spec_planted.change_point)
        null = generate_values(replace(spec_null, seed=(spec_null.seed + trial) % 2 ** 64))
        if find_converge_start(null, alpha=alpha).converged:
            null_hits += 1

    return PowerReport(
        n_trials=n_trials,
        alpha=alpha,
        detection_rate=hits / n_trials,
        null_rate=null_hits / n_trials,
        onset_errors=tuple(errors),
        planted_change_point=spec_planted.change_point,
    )


# -----------------------------
# Oracles (no shared code with mktrend / convergence)
# -----------------------------
def brute_mk_s(series: Sequence[float]) -> int:
    s = 0
    n = len(series)
    for k in range(n - 1):
        for j in range(k + 1, n):
            d = series[j] - series[k]
            s += (d > 0) - (d < 0)
    return s


def brute_suffix_var(series: Sequence[float]) -> List[float]:
    out = []
    n = len(series)
    for i in range(n - 1):
        tail = [float(v) for v in series[i:]]
        mean = sum(tail) / len(tail)
        out.append(sum((v - mean) ** 2 for v in tail) / (len(tail) - 1))
    return out


# -----------------------------
# Synthetic comment corpus
# -----------------------------
def synthetic_corpus(out_dir: str, n_proposals: int = 42, tags_per_proposal: int = 4,
                     weeks: int = 200, comments_per_week: int = 6, seed: int = 0,
                     epoch: datetime = datetime(2016, 1, 4)) -> dict:
    """
    Write comments.csv and seeds.csv shaped like a tagging project: every
    proposal owns one discussion on a Notes board and a small tag vocabulary
    starting with its seed tag. Returns the written paths and the notes board id.
    """
    rng = rng_for(seed)
    epoch = pytz.utc.localize(epoch) if epoch.tzinfo is None else epoch
    os.makedirs(out_dir, exist_ok=True)
    comments_path = os.path.join(out_dir, "comments.csv")
    seeds_path = os.path.join(out_dir, "seeds.csv")
    notes_board = "notes"

    with open(comments_path, "w", newline="", encoding="utf-8") as cf, \
            open(seeds_path, "w", newline="", encoding="utf-8") as sf:
        cw = csv.writer(cf, lineterminator="\n")
        sw = csv.writer(sf, lineterminator="\n")
        cw.writerow(["comment_id", "board_id", "discussion_id", "user", "posted_at", "body"])
        sw.writerow(["proposal_id", "submission_date", "seed_tag"])
        cid = 0
        for p in range(n_proposals):
            vocab = [f"#p{p:02d}seed"] + [f"#p{p:02d}tag{k}" for k in range(1, tags_per_proposal)]
            submission = epoch + timedelta(weeks=weeks - 1, days=3)
            sw.writerow([f"P{p:02d}", submission.date().isoformat(), vocab[0]])
            for w in range(weeks):
                for _ in range(comments_per_week):
                    k = int(rng.integers(1, 3))
                    picks = rng.choice(len(vocab), size=k, replace=False)
                    body = "spotted " + " ".join(vocab[i] for i in sorted(picks))
                    ts = epoch + timedelta(weeks=w, hours=int(rng.integers(0, 24 * 7)))
                    board = notes_board if rng.random() < 0.9 else "chat"
                    cw.writerow([f"c{cid}", board, f"d{p:02d}", f"u{int(rng.integers(0, 50))}",
                                 ts.isoformat(), body])
                    cid += 1
    return {"comments": comments_path, "seeds": seeds_path, "notes_board": notes_board}
