# data_tools.py
"""
CSV and JSON helpers shared by the pipeline and the CLI.

Reading tries a BOM-based encoding guess first and then falls back to common
encodings. Writing always produces UTF-8 with LF line endings so reruns are
byte-identical.
"""
from __future__ import annotations

import json
import math
import os
from typing import Iterable, Optional

import numpy as np
import pandas as pd

# -----------------------------
# CSV reading (robust)
# -----------------------------
FALLBACK_ENCODINGS = ["utf-8-sig", "utf-16", "utf-16-le", "utf-16-be", "utf-8", "cp1252", "latin-1"]


def _bom_guess(path: str) -> Optional[str]:
    with open(path, "rb") as f:
        sig = f.read(4)
    # "utf-16" consumes the BOM; the -le/-be codecs would leave it in the first header
    if sig.startswith(b"\xff\xfe") or sig.startswith(b"\xfe\xff"):
        return "utf-16"
    if sig.startswith(b"\xef\xbb\xbf"):
        return "utf-8-sig"
    return None


def read_csv_auto(source, **kwargs) -> pd.DataFrame:
    """Read a CSV path (or open text buffer) trying several encodings."""
    if not isinstance(source, (str, os.PathLike)):
        return pd.read_csv(source, **kwargs)

    path = os.fspath(source)
    first = _bom_guess(path)
    tried = []
    for enc in [e for e in [first] + FALLBACK_ENCODINGS if e]:
        try:
            return pd.read_csv(path, encoding=enc, **kwargs)
        except UnicodeError as e:
            tried.append((enc, str(e)))
    raise UnicodeError(f"Failed to decode {path}. Tried: {tried}")


def read_numeric_column(source) -> np.ndarray:
    """
    Take the first numeric-looking column of a CSV as a float series.
    A headerless single-column file is accepted as well.
    """
    df = read_csv_auto(source)
    df_num = df.apply(pd.to_numeric, errors="coerce")
    numeric_cols = [c for c in df.columns if df_num[c].notna().any()]
    if not numeric_cols:
        raise ValueError("No numeric column found")
    col = numeric_cols[0]
    values = df_num[col].dropna().to_numpy(dtype=float)
    # headerless file: the "header" was the first value
    try:
        head = float(str(col))
    except ValueError:
        return values
    return np.concatenate([[head], values])


# -----------------------------
# Writing
# -----------------------------
def ensure_outdir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def save_frame_csv(df: pd.DataFrame, path: str) -> str:
    ensure_outdir(os.path.dirname(path) or ".")
    df.to_csv(path, index=False, lineterminator="\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def canonical_json(payload) -> str:
    """Sorted keys, fixed indent, non-finite floats as null."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_json(payload, path: str) -> str:
    ensure_outdir(os.path.dirname(path) or ".")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(canonical_json(payload))
    return path


# -----------------------------
# Rule tables
# -----------------------------
RULE_TABLE_COLUMNS = ["index", "LHS", "RHS", "support", "confidence", "count", "week"]


def rule_table_frame(rows: Iterable) -> pd.DataFrame:
    """
    Render RuleSnapshot rows as the LHS/RHS/support/confidence/count/week table,
    rounded to 4 decimals. The index column numbers rows in output order.
    """
    records = [
        {
            "LHS": r.rule.render_lhs(),
            "RHS": r.rule.render_rhs(),
            "support": round(r.support, 4),
            "confidence": round(r.confidence, 4),
            "count": int(r.count),
            "week": int(r.week),
        }
        for r in rows
    ]
    df = pd.DataFrame.from_records(records, columns=RULE_TABLE_COLUMNS[1:])
    df.insert(0, "index", range(1, len(df) + 1))
    return df


def save_rule_table(rows: Iterable, path: str) -> str:
    return save_frame_csv(rule_table_frame(rows), path)


