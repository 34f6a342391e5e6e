import json

import pytest

from tsecues.cli import main


@pytest.fixture(scope="module")
def work(fixture_manifest, tmp_path_factory):
    return tmp_path_factory.mktemp("cli"), fixture_manifest


def test_stagewise_flow(work, capsys):
    out, manifest = work
    assert main(["ingest", "--manifest", str(manifest), "--out", str(out), "--seed", "4"]) == 0
    records = out / "corpus" / "records.jsonl"
    rows = [json.loads(line) for line in records.read_text().splitlines()]
    assert len(rows) == 40 and all("part" in r and "split" in r for r in rows)

    attrs = out / "corpus" / "attributes.jsonl"
    assert main(["attributes", "--manifest", str(records), "--out", str(attrs)]) == 0
    assert len(attrs.read_text().splitlines()) == 40

    assert main(["rir", "--count", "3", "--split", "train", "--seed", "4", "--out", str(out)]) == 0
    assert len(list((out / "rirs" / "train").glob("*.wav"))) == 6

    assert main(["mix", "--out", str(out), "--seed", "4", "--train", "10", "--val", "0",
                 "--test", "0", "--rir-train", "3", "--rir-val", "0", "--rir-test", "0",
                 "--emotion-frac", "0.3", "--age-frac", "0.2"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["mixtures"]["train"] == {"emotion": 3, "age": 2, "plain": 5}

    assert main(["prompts", "--out", str(out), "--seed", "5"]) == 0
    capsys.readouterr()
    assert main(["validate", str(out)]) == 0
    assert "0 violation(s)" in capsys.readouterr().out


def test_validate_exit_one(work, tmp_path):
    out, _ = work
    path = out / "mixtures" / "train" / "manifest.jsonl"
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    rows[0]["cues"]["loudness"] = "unknown"
    bad = tmp_path / "bad"
    (bad / "mixtures" / "train").mkdir(parents=True)
    (bad / "mixtures" / "train" / "manifest.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in rows))
    assert main(["validate", str(bad)]) == 1


def test_bad_manifest_exit_two(tmp_path, capsys):
    m = tmp_path / "m.jsonl"
    m.write_text('{"id": "x"}\n')
    assert main(["ingest", "--manifest", str(m), "--out", str(tmp_path)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_bad_config_exit_two(tmp_path, fixture_manifest):
    assert main(["build", "--manifest", str(fixture_manifest), "--out", str(tmp_path),
                 "--emotion-frac", "0.8", "--age-frac", "0.5"]) == 2
    assert main(["build", "--out", str(tmp_path)]) == 2
    cfg = tmp_path / "c.yaml"
    cfg.write_text("unknown_key: 1\n")
    assert main(["build", "--out", str(tmp_path), "--config", str(cfg)]) == 2


def test_fixture_command(tmp_path):
    assert main(["fixture", "--out", str(tmp_path)]) == 0
    assert len(list((tmp_path / "audio").glob("*.wav"))) == 40
