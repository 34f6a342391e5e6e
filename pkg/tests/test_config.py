import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tsecues.config import BuildConfig, ConfigError, pool_counts, stream


def test_default_counts_match_sub_pool_totals():
    c = BuildConfig().counts()
    assert c["train"] == {"emotion": 20_000, "age": 10_000, "plain": 70_000}
    assert c["val"] == {"emotion": 2_000, "age": 1_000, "plain": 7_000}


def test_desk_counts():
    assert pool_counts(100, {"emotion": 0.2, "age": 0.1, "plain": 0.7}) == \
        {"emotion": 20, "age": 10, "plain": 70}
    assert pool_counts(10, {"emotion": 1, "age": 1, "plain": 1}) == {"emotion": 4, "age": 3, "plain": 3}


@given(st.integers(0, 10_000), st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(
    lambda v: sum(v) > 0.01))
def test_pool_counts_sum_and_rounding(total, fr):
    fractions = dict(zip(("emotion", "age", "plain"), fr))
    counts = pool_counts(total, fractions)
    assert sum(counts.values()) == total
    s = sum(fr)
    for p, v in counts.items():
        assert abs(v - total * fractions[p] / s) < 1


def test_streams_are_named_and_stable():
    a = stream(1, "pairs", "train", 3).random(3)
    np.testing.assert_array_equal(a, stream(1, "pairs", "train", 3).random(3))
    assert not np.array_equal(a, stream(1, "pairs", "train", 4).random(3))
    assert not np.array_equal(a, stream(2, "pairs", "train", 3).random(3))


def test_invalid_configs():
    with pytest.raises(ConfigError):
        BuildConfig(totals={"train": -1})
    with pytest.raises(ConfigError):
        BuildConfig(totals={"train": 5}, rir_counts={"train": 0})
    with pytest.raises(ConfigError):
        BuildConfig(fractions={"emotion": 0, "age": 0, "plain": 0})
    with pytest.raises(ConfigError):
        BuildConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        BuildConfig(thresholds={"loudness_db": -1})


def test_load_yaml_and_json(tmp_path):
    (tmp_path / "c.yaml").write_text("manifests: [data/m.jsonl]\nmaster_seed: 3\ntotals: {train: 10}\n")
    cfg = BuildConfig.load(tmp_path / "c.yaml")
    assert cfg.master_seed == 3 and cfg.totals["train"] == 10 and cfg.totals["val"] == 0
    assert cfg.manifests == [str(tmp_path / "data" / "m.jsonl")]
    (tmp_path / "c.json").write_text(json.dumps(cfg.to_dict()))
    assert BuildConfig.load(tmp_path / "c.json") == cfg
    (tmp_path / "bad.yaml").write_text("- a list\n")
    with pytest.raises(ConfigError):
        BuildConfig.load(tmp_path / "bad.yaml")
