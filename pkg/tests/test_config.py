import json
import os
from dataclasses import replace
from datetime import datetime

import pytest
import pytz

from tagtrend.config import (ALPHA_LEVELS, ENV_CONFIG_KEY, ENV_OUTPUT_KEY, RunConfig, config_from_dict, load_config,
                             parse_epoch, parse_lags)
from tagtrend.errors import ConfigError
from tagtrend.stationarity import DF_CRITICAL_VALUES


def test_defaults_and_path_resolution(tmp_path):
    cfg = config_from_dict({"comments": "data/c.csv", "seeds": "/abs/s.csv"}, base_dir=str(tmp_path))
    assert cfg.comments == os.path.join(str(tmp_path), "data", "c.csv")
    assert cfg.seeds == "/abs/s.csv"
    assert cfg.output_dir == os.path.join(str(tmp_path), "results")
    assert (cfg.min_support, cfg.min_confidence, cfg.alpha) == (0.001, 0.001, 0.05)
    assert cfg.notes_boards is None
    assert cfg.lags == "auto" and cfg.workers == 1 and cfg.exclude_tags == []


def test_full_config():
    cfg = config_from_dict({
        "comments": "c.csv", "seeds": "s.csv",
        "epoch_date": "2016-01-04",
        "notes_boards": ["n1", 7],
        "transaction_unit": "discussion-week",
        "thresholds": {"min_support": 0.01, "min_confidence": 0.2},
        "alpha": 0.1, "lags": "4", "exclude_tags": ["#possiblenewglitch"], "workers": 2,
    })
    assert cfg.epoch_date == pytz.utc.localize(datetime(2016, 1, 4))
    assert cfg.notes_boards == ["n1", "7"]
    assert cfg.lags == 4
    assert cfg.min_confidence == 0.2


@pytest.mark.parametrize("raw", [
    {"seeds": "s.csv"},
    {"comments": "c.csv", "seeds": "s.csv", "colour": "blue"},
    {"comments": "c.csv", "seeds": "s.csv", "transaction_unit": "user"},
    {"comments": "c.csv", "seeds": "s.csv", "thresholds": {"min_support": 2}},
    {"comments": "c.csv", "seeds": "s.csv", "alpha": 0.7},
    {"comments": "c.csv", "seeds": "s.csv", "alpha": 0.02},
    {"comments": "c.csv", "seeds": "s.csv", "lags": "bic"},
    {"comments": "c.csv", "seeds": "s.csv", "lags": -1},
    {"comments": "c.csv", "seeds": "s.csv", "workers": 0},
    {"comments": "c.csv", "seeds": "s.csv", "epoch_date": "last tuesday"},
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


@pytest.mark.parametrize("alpha", [0.02, 0.2, 0.0])
def test_alpha_without_critical_values_is_rejected(alpha):
    with pytest.raises(ConfigError):
        RunConfig(comments="c.csv", seeds="s.csv", alpha=alpha)
    cfg = RunConfig(comments="c.csv", seeds="s.csv")
    with pytest.raises(ConfigError):
        replace(cfg, alpha=alpha)


def test_alpha_levels_match_adf_table():
    assert tuple(DF_CRITICAL_VALUES) == ALPHA_LEVELS
    for alpha in ALPHA_LEVELS:
        assert RunConfig(comments="c.csv", seeds="s.csv", alpha=alpha).alpha == alpha


def test_parse_helpers():
    assert parse_lags("Schwert") == "schwert"
    assert parse_lags("AIC") == "aic"
    assert parse_lags(0) == 0
    with pytest.raises(ConfigError):
        parse_lags(True)
    assert parse_epoch(None) is None
    assert parse_epoch("2016-01-04T02:00:00+02:00") == pytz.utc.localize(datetime(2016, 1, 4))


def test_load_config_from_env(tmp_path, monkeypatch):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"comments": "c.csv", "seeds": "s.csv", "output_dir": "out"}), encoding="utf-8")
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(ENV_CONFIG_KEY, str(path))
    monkeypatch.delenv(ENV_OUTPUT_KEY, raising=False)
    cfg = load_config()
    assert isinstance(cfg, RunConfig)
    assert cfg.output_dir == os.path.join(str(tmp_path), "out")

    monkeypatch.setenv(ENV_OUTPUT_KEY, str(tmp_path / "elsewhere"))
    assert load_config(str(path)).output_dir == str(tmp_path / "elsewhere")


def test_load_config_errors(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(ENV_CONFIG_KEY, raising=False)
    with pytest.raises(ConfigError):
        load_config()
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    arr = tmp_path / "arr.json"
    arr.write_text("[]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(arr))
