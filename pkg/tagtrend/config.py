"""
Run configuration for the tagtrend pipeline.

The config is a JSON document. Its default location comes from the .env key
TAGTREND_CONFIG (override with --config); TAGTREND_OUTPUT_DIR overrides the
output directory named in the file.

Example:
  {
    "comments": "data/comments.csv",
    "seeds": "data/seeds.csv",
    "output_dir": "results",
    "epoch_date": null,
    "notes_boards": ["notes-1", "notes-2"],
    "transaction_unit": "comment",
    "thresholds": {"min_support": 0.001, "min_confidence": 0.001},
    "alpha": 0.05,
    "lags": "auto",
    "exclude_tags": [],
    "workers": 1
  }
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import List, Optional, Union

import pytz
from dateutil.parser import isoparse
from dotenv import load_dotenv

from tagtrend.errors import ConfigError

# -----------------------------
# Configuration keys
# -----------------------------
ENV_CONFIG_KEY = "TAGTREND_CONFIG"
ENV_OUTPUT_KEY = "TAGTREND_OUTPUT_DIR"

TRANSACTION_UNITS = ("comment", "discussion-week")
LAG_POLICIES = ("auto", "schwert", "aic")
# significance levels with Dickey-Fuller critical values
ALPHA_LEVELS = (0.01, 0.05, 0.10)

DEFAULT_MIN_SUPPORT = 0.001
DEFAULT_MIN_CONFIDENCE = 0.001
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class RunConfig:
    comments: str
    seeds: str
    output_dir: str = "results"
    epoch_date: Optional[datetime] = None
    notes_boards: Optional[List[str]] = None
    transaction_unit: str = "comment"
    min_support: float = DEFAULT_MIN_SUPPORT
    min_confidence: float = DEFAULT_MIN_CONFIDENCE
    alpha: float = DEFAULT_ALPHA
    lags: Union[str, int] = "auto"
    exclude_tags: List[str] = field(default_factory=list)
    workers: int = 1

    def __post_init__(self):
        if self.transaction_unit not in TRANSACTION_UNITS:
            raise ConfigError(
                f"transaction_unit must be one of {TRANSACTION_UNITS}, got {self.transaction_unit!r}"
            )
        for key in ("min_support", "min_confidence"):
            v = getattr(self, key)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{key} must lie in [0, 1], got {v}")
        if self.alpha not in ALPHA_LEVELS:
            raise ConfigError(f"alpha must be one of {ALPHA_LEVELS}, got {self.alpha}")
        parse_lags(self.lags)
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


def parse_lags(value) -> Union[str, int]:
    """Accept a lag policy name (auto, schwert, aic) or a nonnegative integer (also as a string)."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in LAG_POLICIES:
            return v
        if v.isdigit():
            return int(v)
        raise ConfigError(f"lags must be one of {LAG_POLICIES} or an integer, got {value!r}")
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ConfigError(f"lags must be one of {LAG_POLICIES} or an integer >= 0, got {value!r}")
    return value


def parse_epoch(value) -> Optional[datetime]:
    if value in (None, ""):
        return None
    if isinstance(value, datetime):
        ts = value
    else:
        try:
            ts = isoparse(str(value))
        except ValueError as e:
            raise ConfigError(f"epoch_date is not an ISO date: {value!r}") from e
    return to_utc(ts)


def to_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return pytz.utc.localize(ts)
    return ts.astimezone(pytz.utc)


def find_config_path(cli_path: Optional[str]) -> str:
    load_dotenv()  # load .env in cwd
    path = cli_path or os.getenv(ENV_CONFIG_KEY)
    if not path:
        raise ConfigError(f"Config file not found. Pass --config or set {ENV_CONFIG_KEY} in your .env")
    if not os.path.isfile(path):
        raise ConfigError(f"Config path does not exist or is not a file: {path}")
    return path


def _resolve(base_dir: str, p: Optional[str]) -> Optional[str]:
    if p is None:
        return None
    return p if os.path.isabs(p) else os.path.normpath(os.path.join(base_dir, p))


def config_from_dict(raw: dict, base_dir: str = ".") -> RunConfig:
    known = {"comments", "seeds", "output_dir", "epoch_date", "notes_boards", "transaction_unit",
             "thresholds", "alpha", "lags", "exclude_tags", "workers"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
    for key in ("comments", "seeds"):
        if not raw.get(key):
            raise ConfigError(f"Config is missing required key '{key}'")

    thresholds = raw.get("thresholds") or {}
    notes = raw.get("notes_boards")
    return RunConfig(
        comments=_resolve(base_dir, raw["comments"]),
        seeds=_resolve(base_dir, raw["seeds"]),
        output_dir=_resolve(base_dir, raw.get("output_dir") or "results"),
        epoch_date=parse_epoch(raw.get("epoch_date")),
        notes_boards=None if notes is None else [str(b) for b in notes],
        transaction_unit=raw.get("transaction_unit", "comment"),
        min_support=float(thresholds.get("min_support", DEFAULT_MIN_SUPPORT)),
        min_confidence=float(thresholds.get("min_confidence", DEFAULT_MIN_CONFIDENCE)),
        alpha=float(raw.get("alpha", DEFAULT_ALPHA)),
        lags=parse_lags(raw.get("lags", "auto")),
        exclude_tags=[str(t) for t in raw.get("exclude_tags") or []],
        workers=int(raw.get("workers", 1)),
    )


def load_config(cli_path: Optional[str] = None) -> RunConfig:
    path = find_config_path(cli_path)
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Config {path} must hold a JSON object")

    cfg = config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))
    env_out = os.getenv(ENV_OUTPUT_KEY)
    if env_out:
        cfg = replace(cfg, output_dir=env_out)
    return cfg
