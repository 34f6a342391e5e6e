import json
import shutil

import pytest

from tsecues.config import BuildConfig, ConfigError
from tsecues.pipeline import build_dataset, regenerate_prompts, validate_dataset


def _config(manifest, out, **kw):
    base = dict(manifests=[str(manifest)], output_dir=str(out), master_seed=11,
                totals={"train": 20, "val": 5, "test": 5},
                rir_counts={"train": 6, "val": 3, "test": 3})
    base.update(kw)
    return BuildConfig(**base)


@pytest.fixture(scope="module")
def small_build(fixture_manifest, tmp_path_factory):
    out = tmp_path_factory.mktemp("build")
    summary = build_dataset(_config(fixture_manifest, out))
    return out, summary


def _rows(out, split="train"):
    path = out / "mixtures" / split / "manifest.jsonl"
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_build_counts_and_layout(small_build):
    out, summary = small_build
    assert summary["mixtures"]["train"] == {"emotion": 4, "age": 2, "plain": 14}
    rows = _rows(out)
    assert len(rows) == 20
    row = rows[0]
    for rel in row["paths"].values():
        assert (out / rel).exists()
    assert row["phrasebook_version"] == "1"
    assert {"plan", "sources", "rir", "cues", "prompts", "interference_gain",
            "normalization_gain"} <= set(row)
    assert (out / "summary.json").exists() and (out / "config.json").exists()
    assert len(list((out / "rirs" / "train").glob("*.wav"))) == 12


def test_pool_membership_respected(small_build):
    out, _ = small_build
    for row in _rows(out):
        recs = [s["record"] for s in row["sources"]]
        if row["pool"] == "emotion":
            assert all("emotion" in r for r in recs)
        elif row["pool"] == "age":
            assert all("age" in r and "emotion" not in r for r in recs)
        else:
            assert all("age" not in r and "emotion" not in r for r in recs)
        assert recs[0]["speaker_id"] != recs[1]["speaker_id"] or recs[0]["corpus"] != recs[1]["corpus"]
        assert {r["part"] for r in recs} == {"part1", "part2"}
        assert all(r["split"] == "train" for r in recs)


def test_fresh_build_validates(small_build):
    report = validate_dataset(small_build[0])
    assert report["mixtures"] == 30
    assert report["violations"] == []


def _copy(small_build, tmp_path):
    dst = tmp_path / "copy"
    shutil.copytree(small_build[0], dst)
    return dst


def test_validate_flags_edited_sir(small_build, tmp_path):
    out = _copy(small_build, tmp_path)
    path = out / "mixtures" / "train" / "manifest.jsonl"
    rows = _rows(out)
    rows[0]["plan"]["sir_db"] += 0.5
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    problems = [v["problem"] for v in validate_dataset(out)["violations"]]
    assert any("measured SIR" in p for p in problems)


def test_validate_flags_missing_file_and_wrong_cue(small_build, tmp_path):
    out = _copy(small_build, tmp_path)
    rows = _rows(out)
    (out / rows[1]["paths"]["mixture"]).unlink()
    rows[2]["cues"]["distance"] = "farther" if rows[2]["cues"]["distance"] != "farther" else "nearer"
    (out / "mixtures" / "train" / "manifest.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in rows))
    report = validate_dataset(out)
    by_id = {}
    for v in report["violations"]:
        by_id.setdefault(v["id"], []).append(v["problem"])
    assert any("missing mixture" in p for p in by_id[rows[1]["id"]])
    assert any("cue distance" in p for p in by_id[rows[2]["id"]])


def test_regenerate_prompts_stays_valid(small_build, tmp_path):
    out = _copy(small_build, tmp_path)
    assert regenerate_prompts(out, master_seed=99) == 30
    assert validate_dataset(out)["violations"] == []


def test_empty_pool_fails_before_audio(fixture_manifest, tmp_path):
    lines = [json.loads(line) for line in fixture_manifest.read_text().splitlines()]
    kept = [dict(r, audio_path=str(fixture_manifest.parent / r["audio_path"]))
            for r in lines if "age" not in r]
    manifest = tmp_path / "noage.jsonl"
    manifest.write_text("".join(json.dumps(r) + "\n" for r in kept))
    out = tmp_path / "out"
    with pytest.raises(ConfigError, match="age"):
        build_dataset(_config(manifest, out))
    assert not out.exists() or not list(out.rglob("*.wav"))


def test_parallel_equals_serial(fixture_manifest, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    kw = dict(totals={"train": 8, "val": 0, "test": 0}, rir_counts={"train": 3, "val": 0, "test": 0})
    build_dataset(_config(fixture_manifest, a, jobs=1, **kw))
    build_dataset(_config(fixture_manifest, b, jobs=2, **kw))
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
