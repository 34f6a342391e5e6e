"""Source-corpus manifests, speaker/content-disjoint splitting, sub-pools and pair sampling."""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.io import wavfile

from .attributes.speech import LANGUAGES

log = logging.getLogger(__name__)

GENDERS = ("male", "female")
PARTS = ("part1", "part2")
SPLITS = ("train", "val", "test")
POOLS = ("emotion", "age", "plain")
REQUIRED_FIELDS = ("id", "audio_path", "speaker_id", "language", "gender", "corpus")
DEFAULT_SPLIT_FRACTIONS = {"train": 0.7, "val": 0.15, "test": 0.15}


class ManifestError(ValueError):
    """Malformed manifest; ``errors`` holds ``(line_number, message)`` pairs."""

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        lines = "; ".join(f"line {n}: {msg}" for n, msg in errors[:20])
        more = f" (+{len(errors) - 20} more)" if len(errors) > 20 else ""
        super().__init__(f"{len(errors)} invalid manifest line(s): {lines}{more}")


class SplitError(ValueError):
    pass


class PoolError(ValueError):
    pass


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    audio_path: str
    speaker_id: str
    language: str
    gender: str
    corpus: str
    age: int | None = None
    emotion: str | None = None
    transcription: str | None = None
    part: str | None = None
    split: str | None = None

    @property
    def speaker_key(self) -> str:
        """Speaker identity qualified by corpus; raw ids collide across corpora."""
        return f"{self.corpus}/{self.speaker_id}"

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def normalize_transcription(text: str) -> str:
    text = unicodedata.normalize("NFC", text).lower()
    text = "".join(" " if unicodedata.category(ch).startswith("P") else ch for ch in text)
    return re.sub(r"\s+", " ", text).strip()


def _check_audio(path: Path) -> str | None:
    try:
        _, data = wavfile.read(str(path), mmap=True)
    except (OSError, ValueError) as exc:
        return f"unreadable audio {str(path)!r}: {exc}"
    if data.ndim != 1:
        return f"audio {str(path)!r} is not mono"
    if data.shape[0] == 0:
        return f"audio {str(path)!r} is empty"
    return None


def parse_record(obj: dict, base_dir: Path | None = None, check_audio: bool = True) -> UtteranceRecord:
    """Validate one manifest object; raises ``ValueError`` naming the offending field."""
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    for name in REQUIRED_FIELDS:
        value = obj.get(name)
        if value is None or (isinstance(value, str) and not value.strip()):
            raise ValueError(f"missing required field {name!r}")
    language = str(obj["language"]).lower()
    if language not in LANGUAGES:
        raise ValueError(f"unsupported language {obj['language']!r}")
    gender = str(obj["gender"]).lower()
    if gender not in GENDERS:
        raise ValueError(f"unsupported gender {obj['gender']!r}")
    age = obj.get("age")
    if age is not None:
        if isinstance(age, bool) or not isinstance(age, int) or not 0 < age < 120:
            raise ValueError(f"age must be an integer in (0, 120), got {age!r}")
    emotion = obj.get("emotion")
    if emotion is not None:
        emotion = str(emotion).strip().lower() or None
    transcription = obj.get("transcription")
    if transcription is not None:
        transcription = str(transcription).strip() or None
    part = obj.get("part")
    if part is not None and part not in PARTS:
        raise ValueError(f"part must be one of {PARTS}, got {part!r}")
    split = obj.get("split")
    if split is not None and split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")

    audio_path = Path(str(obj["audio_path"])).expanduser()
    if not audio_path.is_absolute() and base_dir is not None:
        audio_path = base_dir / audio_path
    if check_audio:
        problem = _check_audio(audio_path)
        if problem:
            raise ValueError(problem)

    return UtteranceRecord(
        id=str(obj["id"]),
        audio_path=str(audio_path),
        speaker_id=str(obj["speaker_id"]),
        language=language,
        gender=gender,
        corpus=str(obj["corpus"]),
        age=age,
        emotion=emotion,
        transcription=transcription,
        part=part,
        split=split,
    )


def ingest_manifest(path, check_audio: bool = True) -> list[UtteranceRecord]:
    """Read a JSONL manifest; every bad line is reported with its line number."""
    path = Path(path)
    records: list[UtteranceRecord] = []
    errors: list[tuple[int, str]] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = parse_record(json.loads(line), path.parent, check_audio)
            except json.JSONDecodeError as exc:
                errors.append((lineno, f"invalid JSON: {exc.msg}"))
                continue
            except ValueError as exc:
                errors.append((lineno, str(exc)))
                continue
            if rec.id in seen:
                errors.append((lineno, f"duplicate id {rec.id!r}"))
                continue
            seen.add(rec.id)
            records.append(rec)
    if errors:
        raise ManifestError(errors)
    return records


def write_records(path, records: Iterable[UtteranceRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def split_corpus(records: list[UtteranceRecord], rng: np.random.Generator):
    """Split one corpus into speaker- and content-disjoint halves.

    Speakers are shuffled and halved. A normalized transcription spoken in
    both halves is kept in the half holding more of its records (ties go to
    part1); the other half's copies are dropped, since no speaker can move.
    """
    if not records:
        raise SplitError("cannot split an empty corpus")
    speakers = sorted({r.speaker_key for r in records})
    if len(speakers) < 2:
        raise SplitError(f"corpus {records[0].corpus!r} has a single speaker and cannot be split")
    order = rng.permutation(len(speakers))
    n1 = (len(speakers) + 1) // 2
    first = {speakers[i] for i in order[:n1]}

    halves = {"part1": [], "part2": []}
    for r in records:
        halves["part1" if r.speaker_key in first else "part2"].append(r)

    counts = {p: Counter(normalize_transcription(r.transcription) for r in halves[p] if r.transcription)
              for p in PARTS}
    shared = set(counts["part1"]) & set(counts["part2"])
    owner = {t: ("part1" if counts["part1"][t] >= counts["part2"][t] else "part2") for t in shared}

    out = {}
    dropped = 0
    for p in PARTS:
        kept = []
        for r in halves[p]:
            t = normalize_transcription(r.transcription) if r.transcription else None
            if t in owner and owner[t] != p:
                dropped += 1
                continue
            kept.append(replace(r, part=p))
        out[p] = kept
    if dropped:
        log.info("corpus %s: dropped %d records to keep content disjoint", records[0].corpus, dropped)
    return out["part1"], out["part2"]


def assign_splits(records: list[UtteranceRecord], rng: np.random.Generator,
                  fractions: dict[str, float] | None = None) -> list[UtteranceRecord]:
    """Assign train/val/test by speaker; records that already carry a split keep it.

    With at least three speakers every split gets one; otherwise all go to train.
    """
    fractions = fractions or DEFAULT_SPLIT_FRACTIONS
    todo = [r for r in records if r.split is None]
    speakers = sorted({r.speaker_key for r in todo})
    n = len(speakers)
    order = [speakers[i] for i in rng.permutation(n)]
    if n >= 3:
        n_val = max(1, int(round(n * fractions["val"])))
        n_test = max(1, int(round(n * fractions["test"])))
        n_val = min(n_val, n - 2)
        n_test = min(n_test, n - 1 - n_val)
    else:
        n_val = n_test = 0
    split_of = {}
    for i, spk in enumerate(order):
        split_of[spk] = "val" if i < n_val else "test" if i < n_val + n_test else "train"
    return [r if r.split is not None else replace(r, split=split_of[r.speaker_key]) for r in records]


def prepare_corpora(records: list[UtteranceRecord], seed: int,
                    fractions: dict[str, float] | None = None) -> list[UtteranceRecord]:
    """Split every corpus into parts, then each part into train/val/test."""
    by_corpus: dict[str, list[UtteranceRecord]] = defaultdict(list)
    for r in records:
        by_corpus[r.corpus].append(r)
    out = []
    for i, name in enumerate(sorted(by_corpus)):
        rng = np.random.default_rng([seed, i])
        part1, part2 = split_corpus(by_corpus[name], rng)
        out.extend(assign_splits(part1, rng, fractions))
        out.extend(assign_splits(part2, rng, fractions))
    return out


def pool_of(record: UtteranceRecord) -> str:
    if record.emotion is not None:
        return "emotion"
    if record.age is not None:
        return "age"
    return "plain"


@dataclass
class PoolSides:
    a: list[UtteranceRecord] = field(default_factory=list)
    b: list[UtteranceRecord] = field(default_factory=list)
    _index: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def side(self, name: str, split: str) -> list[UtteranceRecord]:
        key = (name, split)
        if key not in self._index:
            self._index[key] = [r for r in (self.a if name == "a" else self.b) if r.split == split]
        return self._index[key]


@dataclass
class SubPools:
    emotion: PoolSides
    age: PoolSides
    plain: PoolSides

    def __getitem__(self, name: str) -> PoolSides:
        return getattr(self, name)

    def sizes(self) -> dict[str, dict[str, tuple[int, int]]]:
        return {p: {s: (len(self[p].side("a", s)), len(self[p].side("b", s))) for s in SPLITS}
                for p in POOLS}


def build_subpools(records: list[UtteranceRecord]) -> SubPools:
    """Partition split records into emotion > age > plain pools, part1 -> side a.

    Within a pool, side-b records repeating a side-a transcription are dropped
    (corpora may share prompt sentences across corpus boundaries).
    """
    pools = {p: PoolSides() for p in POOLS}
    for r in records:
        if r.part is None:
            raise PoolError(f"record {r.id!r} has not been split into a part")
        sides = pools[pool_of(r)]
        (sides.a if r.part == "part1" else sides.b).append(r)
    for name, sides in pools.items():
        texts_a = {normalize_transcription(r.transcription) for r in sides.a if r.transcription}
        kept = [r for r in sides.b
                if not (r.transcription and normalize_transcription(r.transcription) in texts_a)]
        if len(kept) != len(sides.b):
            log.info("pool %s: dropped %d side-b records sharing text with side a",
                     name, len(sides.b) - len(kept))
        sides.b = kept
        sides._index.clear()
    return SubPools(**pools)


def sample_pair(pool: PoolSides, split: str, rng: np.random.Generator):
    """One utterance from each side of ``pool`` in random order."""
    a = pool.side("a", split)
    b = pool.side("b", split)
    if not a or not b:
        raise PoolError(f"pool exhausted for split {split!r}: sides have {len(a)} and {len(b)} records")
    ra = a[int(rng.integers(len(a)))]
    rb = b[int(rng.integers(len(b)))]
    if ra.speaker_key == rb.speaker_key:
        raise PoolError(f"pool sides share speaker {ra.speaker_key!r}")
    return (ra, rb) if rng.random() < 0.5 else (rb, ra)
