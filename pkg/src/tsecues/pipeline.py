"""End-to-end dataset build and validation."""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attributes import AttributeProfile, detect_active_regions, measure_attributes, speaking_duration
from .attributes.speech import NoSpeechError
from .audio import SAMPLE_RATE, read_audio, write_audio
from .config import BuildConfig, ConfigError, stream
from .corpus import (
    POOLS,
    SPLITS,
    UtteranceRecord,
    assign_splits,
    build_subpools,
    ingest_manifest,
    parse_record,
    prepare_corpora,
    sample_pair,
    write_records,
)
from .cues import CUE_KINDS, DEFAULT_EMOTION_MAP, RelativeCueSet, build_cue_set
from .mixer import MixturePlan, assemble_mixture, make_plan, measure_sir, trim_and_cap
from .prompts import (
    N_VARIATIONS,
    PHRASEBOOK_VERSION,
    IndistinguishablePairError,
    PromptSpec,
    RephraseClient,
    eligible_cues,
    generate_bundle,
    is_valid_prompt,
)
from .room import RirPair, RoomSpec, make_rir_pair

log = logging.getLogger(__name__)

SIR_TOLERANCE_DB = 0.1


class BuildError(RuntimeError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def _write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(_dump(row) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# ---------------------------------------------------------------- corpus + attributes


def load_records(manifests, seed: int, split_fractions=None) -> list[UtteranceRecord]:
    """Ingest manifests; split into parts/splits unless the manifests already are."""
    records: list[UtteranceRecord] = []
    for m in manifests:
        records.extend(ingest_manifest(m))
    if not records:
        raise ConfigError("no input records")
    if all(r.part is not None and r.split is not None for r in records):
        return records
    if all(r.part is not None for r in records):
        by_group = defaultdict(list)
        for r in records:
            by_group[(r.corpus, r.part)].append(r)
        out = []
        for i, key in enumerate(sorted(by_group)):
            out.extend(assign_splits(by_group[key], stream(seed, "splits", i), split_fractions))
        return out
    return prepare_corpora(records, seed, split_fractions)


@dataclass
class UtteranceProfile:
    profile: AttributeProfile
    trim_start_s: float
    n_samples: int

    def to_dict(self) -> dict:
        d = self.profile.to_dict()
        d["trim_start_s"] = self.trim_start_s
        d["n_samples"] = self.n_samples
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "UtteranceProfile":
        d = dict(d)
        start = d.pop("trim_start_s")
        n = d.pop("n_samples")
        return cls(AttributeProfile.from_dict(d), start, n)


def profile_record(rec: UtteranceRecord, sr: int = SAMPLE_RATE) -> UtteranceProfile | None:
    """VAD, trim/cap and measure one utterance; ``None`` when it holds no speech."""
    x = read_audio(rec.audio_path, sr)
    regions = detect_active_regions(x, sr)
    if not regions:
        log.warning("no speech detected in %s", rec.id)
        return None
    y, trimmed_regions, start = trim_and_cap(x, regions, sr)
    profile = measure_attributes(
        rec.id, y, trimmed_regions, sr,
        transcription=rec.transcription,
        language=rec.language,
        rate_duration_s=speaking_duration(regions),
    )
    return UtteranceProfile(profile, start, len(y))


def compute_profiles(records, jobs: int = 1) -> dict[str, UtteranceProfile]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(profile_record, records, chunksize=4))
    else:
        results = [profile_record(r) for r in records]
    return {r.id: p for r, p in zip(records, results) if p is not None}


def load_trimmed(rec: UtteranceRecord, up: UtteranceProfile, sr: int = SAMPLE_RATE) -> np.ndarray:
    x = read_audio(rec.audio_path, sr)
    a = int(round(up.trim_start_s * sr))
    return x[a : a + up.n_samples]


# ---------------------------------------------------------------- RIRs


def build_rir_pool(split: str, count: int, master_seed: int, out_dir: Path,
                   jobs: int = 1) -> list[dict]:
    """Simulate ``count`` RIR pairs, store them as WAV plus a geometry JSONL."""
    rir_dir = out_dir / "rirs" / split
    tasks = [(split, i, master_seed, str(rir_dir)) for i in range(count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_make_rir, tasks))
    else:
        rows = [_make_rir(t) for t in tasks]
    _write_jsonl(rir_dir / "geometry.jsonl", rows)
    return rows


def _make_rir(task) -> dict:
    split, i, master_seed, rir_dir = task
    pair_id = f"{split}-rir{i:05d}"
    pair = make_rir_pair(pair_id, stream(master_seed, "rooms", split, i), seed=i)
    geo = pair.geometry()
    for k, rir in ((1, pair.rir_1), (2, pair.rir_2)):
        path = Path(rir_dir) / f"{pair_id}_{k}.wav"
        write_audio(path, rir)
        geo[f"rir_{k}_path"] = str(Path("rirs") / split / path.name)
    return geo


def load_rir_pair(geo: dict, out_dir: Path) -> RirPair:
    return RirPair(
        id=geo["id"],
        room=RoomSpec.from_dict(geo["room"]),
        src_pos_1=tuple(geo["src_pos_1"]),
        src_pos_2=tuple(geo["src_pos_2"]),
        rir_1=read_audio(out_dir / geo["rir_1_path"]),
        rir_2=read_audio(out_dir / geo["rir_2_path"]),
    )


# ---------------------------------------------------------------- mixtures

_CTX: dict = {}


def _init_worker(ctx: dict) -> None:
    _CTX.clear()
    _CTX.update(ctx)


def _plan_slot(split: str, pool: str, k: int, mixture_id: str):
    """Sample pair, plan, geometry, cues and prompts; resample indistinguishable pairs."""
    ctx = _CTX
    seed = ctx["seed"]
    rirs = ctx["rirs"][split]
    last_error = None
    for attempt in range(ctx["retry_budget"]):
        key = (split, pool, k, attempt)
        rec_1, rec_2 = sample_pair(ctx["pools"][pool], split, stream(seed, "pairs", *key))
        up_1, up_2 = ctx["profiles"][rec_1.id], ctx["profiles"][rec_2.id]
        geo = rirs[int(stream(seed, "rir-pick", *key).integers(len(rirs)))]
        plan = make_plan(
            mixture_id, (rec_1.id, rec_2.id),
            (up_1.n_samples / SAMPLE_RATE, up_2.n_samples / SAMPLE_RATE),
            geo["id"], stream(seed, "plan", *key), seed=seed,
        )
        recs, ups = (rec_1, rec_2), (up_1, up_2)
        t = plan.target_idx - 1
        cues = build_cue_set(ups[t].profile, recs[t], ups[1 - t].profile, recs[1 - t], plan, geo,
                             ctx["thresholds"], ctx["emotion_map"])
        try:
            bundle = generate_bundle(cues, stream(seed, "prompts", *key), mixture_id)
        except IndistinguishablePairError as exc:
            last_error = exc
            continue
        return attempt, recs, ups, geo, plan, cues, bundle
    raise BuildError(f"{mixture_id}: no distinguishable pair after "
                     f"{ctx['retry_budget']} attempts ({last_error})")


def _prompt_rows(bundle: list[PromptSpec], client: RephraseClient | None) -> list[dict]:
    """Serialize a bundle, swapping in external paraphrases when an endpoint is set."""
    rows = []
    for i in range(0, len(bundle), N_VARIATIONS):
        group = bundle[i : i + N_VARIATIONS]
        if client is not None and client.enabled:
            texts = client.rephrase(group[0], len(group))
        else:
            texts = [p.text for p in group]
        for p, text in zip(group, texts):
            source = "builtin" if text == p.text else "external"
            p.text = text
            rows.append(dict(p.to_dict(), source=source))
    return rows


def _build_slot(task) -> dict:
    split, pool, k, mixture_id = task
    ctx = _CTX
    out_dir = Path(ctx["out_dir"])
    attempt, recs, ups, geo, plan, cues, bundle = _plan_slot(split, pool, k, mixture_id)

    prompt_rows = _prompt_rows(bundle, ctx.get("rephrase"))

    pair = load_rir_pair(geo, out_dir)
    s1 = load_trimmed(recs[0], ups[0])
    s2 = load_trimmed(recs[1], ups[1])
    audio = assemble_mixture(plan, s1, s2, pair.rir_1, pair.rir_2,
                             ups[0].profile.active_regions, ups[1].profile.active_regions)
    t = plan.target_idx - 1
    interference = audio.mixture - audio.target_reverberant
    achieved = measure_sir(audio.target_reverberant, interference,
                           ups[t].profile.active_regions, ups[1 - t].profile.active_regions,
                           SAMPLE_RATE, plan.offsets_s[t], plan.offsets_s[1 - t])

    rel = Path("mixtures") / split
    paths = {
        "mixture": str(rel / f"{mixture_id}_mix.wav"),
        "target_reverberant": str(rel / f"{mixture_id}_target.wav"),
        "target_clean": str(rel / f"{mixture_id}_target_clean.wav"),
    }
    write_audio(out_dir / paths["mixture"], audio.mixture)
    write_audio(out_dir / paths["target_reverberant"], audio.target_reverberant)
    write_audio(out_dir / paths["target_clean"], audio.target_clean)

    return {
        "id": mixture_id,
        "split": split,
        "pool": pool,
        "attempt": attempt,
        "plan": plan.to_dict(),
        "sources": [{"record": r.to_dict(), "attributes": u.to_dict()} for r, u in zip(recs, ups)],
        "rir": dict(geo),
        "cues": cues.to_dict(),
        "prompts": prompt_rows,
        "paths": paths,
        "interference_gain": audio.interference_gain,
        "normalization_gain": audio.normalization_gain,
        "achieved_sir_db": achieved,
        "phrasebook_version": PHRASEBOOK_VERSION,
    }


def _slots(counts: dict[str, dict[str, int]]):
    for split in SPLITS:
        idx = 0
        for pool in POOLS:
            for k in range(counts[split][pool]):
                yield split, pool, k, f"{split}-{idx:06d}"
                idx += 1


def check_pools(pools, counts) -> None:
    for split in SPLITS:
        for pool in POOLS:
            if counts[split][pool] <= 0:
                continue
            a = pools[pool].side("a", split)
            b = pools[pool].side("b", split)
            if not a or not b:
                raise ConfigError(
                    f"{counts[split][pool]} {split} mixtures requested from the {pool} sub-pool, "
                    f"but its sides hold {len(a)} and {len(b)} usable records")


def load_profiles(path) -> dict[str, UtteranceProfile]:
    out = {}
    for row in _read_jsonl(path):
        out[row["utterance_id"]] = UtteranceProfile.from_dict(row)
    return out


def write_profiles(path, profiles: dict[str, UtteranceProfile]) -> None:
    _write_jsonl(Path(path), [profiles[k].to_dict() for k in sorted(profiles)])


def load_rir_pool(out_dir: Path, split: str) -> list[dict] | None:
    path = Path(out_dir) / "rirs" / split / "geometry.jsonl"
    return _read_jsonl(path) if path.exists() else None


def build_dataset(config: BuildConfig) -> dict:
    """Run ingest -> attributes -> rir -> mix -> prompts; returns the summary report."""
    records = load_records(config.manifests, config.master_seed, config.split_fractions)
    profiles = compute_profiles(records, config.jobs)
    # fail on unusable pools before anything is written
    check_pools(build_subpools([r for r in records if r.id in profiles]), config.counts())
    out_dir = Path(config.output_dir)
    write_records(out_dir / "corpus" / "records.jsonl", records)
    write_profiles(out_dir / "corpus" / "attributes.jsonl", profiles)
    return mix_dataset(config, records, profiles)


def mix_dataset(config: BuildConfig, records: list[UtteranceRecord],
                profiles: dict[str, UtteranceProfile], reuse_rirs: bool = False) -> dict:
    """Mix, render prompts and write manifests from already profiled records."""
    out_dir = Path(config.output_dir)
    counts = config.counts()
    usable = [r for r in records if r.id in profiles]
    pools = build_subpools(usable)
    check_pools(pools, counts)
    (out_dir / "config.json").parent.mkdir(parents=True, exist_ok=True)
    # run-location and parallelism do not affect content, so they stay out of the dump
    dumped = {k: v for k, v in config.to_dict().items() if k not in ("output_dir", "jobs")}
    (out_dir / "config.json").write_text(_dump(dumped) + "\n", encoding="utf-8")

    rirs = {}
    for split in SPLITS:
        if sum(counts[split].values()) == 0:
            continue
        pool = load_rir_pool(out_dir, split) if reuse_rirs else None
        if not pool:
            pool = build_rir_pool(split, config.rir_counts[split], config.master_seed,
                                  out_dir, config.jobs)
        rirs[split] = pool

    ctx = {
        "seed": config.master_seed,
        "pools": pools,
        "profiles": profiles,
        "rirs": rirs,
        "thresholds": config.threshold_values(),
        "emotion_map": config.emotion_map or DEFAULT_EMOTION_MAP,
        "retry_budget": config.retry_budget,
        "out_dir": str(out_dir),
        "rephrase": RephraseClient(url=config.rephrase_url, cache_dir=config.rephrase_cache)
        if config.rephrase_url else None,
    }
    tasks = list(_slots(counts))
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs, initializer=_init_worker,
                                 initargs=(ctx,)) as ex:
            rows = list(ex.map(_build_slot, tasks, chunksize=4))
    else:
        _init_worker(ctx)
        rows = [_build_slot(t) for t in tasks]

    by_split = defaultdict(list)
    for row in rows:
        by_split[row["split"]].append(row)
    for split in SPLITS:
        if split in by_split:
            _write_jsonl(out_dir / "mixtures" / split / "manifest.jsonl", by_split[split])

    summary = summarize(rows, counts)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")
    return summary


def _histogram_label(kind: str, label: str) -> str:
    if kind == "transcription" and label not in ("same", "unknown"):
        return "<text>"
    return label


def summarize(rows: list[dict], counts=None) -> dict:
    hist: dict[str, dict[str, Counter]] = defaultdict(lambda: defaultdict(Counter))
    sir = defaultdict(list)
    per_pool = defaultdict(Counter)
    for row in rows:
        per_pool[row["split"]][row["pool"]] += 1
        for kind in CUE_KINDS:
            hist[row["split"]][kind][_histogram_label(kind, row["cues"][kind])] += 1
        sir[row["split"]].append(row["achieved_sir_db"] - row["plan"]["sir_db"])
    return {
        "requested": counts,
        "mixtures": {s: dict(per_pool[s]) for s in per_pool},
        "cue_histograms": {s: {k: dict(v) for k, v in kinds.items()} for s, kinds in hist.items()},
        "sir_error_db": {
            s: {"max_abs": float(np.max(np.abs(v))), "mean": float(np.mean(v))}
            for s, v in sir.items()
        },
    }


# ---------------------------------------------------------------- validation


def _plan_violations(plan: MixturePlan) -> list[str]:
    out = []
    (o1, o2), (d1, d2) = plan.offsets_s, plan.durations_s
    eps = 1e-6
    if min(o1, o2) < -eps:
        out.append("negative offset")
    overlap = max(0.0, min(o1 + d1, o2 + d2) - max(o1, o2))
    if abs(overlap - plan.overlap_s) > eps:
        out.append(f"overlap {plan.overlap_s} != {overlap}")
    if abs(plan.mixture_len_s - max(o1 + d1, o2 + d2)) > eps:
        out.append("mixture length does not match offsets")
    if plan.mixture_len_s > 6.0 + eps:
        out.append(f"mixture length {plan.mixture_len_s} > 6 s")
    if not -6.0 - eps <= plan.sir_db <= 6.0 + eps:
        out.append(f"SIR {plan.sir_db} outside [-6, 6] dB")
    return out


def validate_record(row: dict, out_dir: Path, thresholds, emotion_map) -> list[str]:
    problems = []
    for name, rel in row["paths"].items():
        if not (out_dir / rel).exists():
            problems.append(f"missing {name} file {rel}")
    plan = MixturePlan.from_dict(row["plan"])
    problems += _plan_violations(plan)

    recs = [parse_record(s["record"], check_audio=False) for s in row["sources"]]
    ups = [UtteranceProfile.from_dict(s["attributes"]) for s in row["sources"]]
    t = plan.target_idx - 1

    if not any(p.startswith("missing") for p in problems):
        mix = read_audio(out_dir / row["paths"]["mixture"])
        target = read_audio(out_dir / row["paths"]["target_reverberant"])
        if len(mix) != len(target):
            problems.append("mixture and target lengths differ")
        else:
            try:
                sir = measure_sir(target, mix - target, ups[t].profile.active_regions,
                                  ups[1 - t].profile.active_regions, SAMPLE_RATE,
                                  plan.offsets_s[t], plan.offsets_s[1 - t])
            except NoSpeechError as exc:
                problems.append(f"SIR not measurable: {exc}")
            else:
                if abs(sir - plan.sir_db) > SIR_TOLERANCE_DB:
                    problems.append(f"measured SIR {sir:.3f} dB != planned {plan.sir_db:.3f} dB")

    try:
        cues = build_cue_set(ups[t].profile, recs[t], ups[1 - t].profile, recs[1 - t], plan,
                             row["rir"], thresholds, emotion_map)
    except ValueError as exc:
        problems.append(f"cues not derivable: {exc}")
    else:
        stored = RelativeCueSet.from_dict(row["cues"])
        for kind in CUE_KINDS:
            if getattr(stored, kind) != getattr(cues, kind):
                problems.append(f"cue {kind}: stored {getattr(stored, kind)!r}, "
                                f"derived {getattr(cues, kind)!r}")

    allowed = {tuple(c) for c in eligible_cues(RelativeCueSet.from_dict(row["cues"]))}
    if not row["prompts"]:
        problems.append("no prompts")
    for p in row["prompts"]:
        spec = PromptSpec.from_dict(p)
        if not spec.cue_subset:
            problems.append("prompt with empty cue subset")
        for c in spec.cue_subset:
            if tuple(c) not in allowed:
                problems.append(f"prompt cue {tuple(c)} is not an eligible cue")
        if p.get("source", "builtin") == "builtin" and not is_valid_prompt(spec.text):
            problems.append(f"prompt does not parse: {spec.text!r}")
    return problems


def validate_dataset(out_dir) -> dict:
    """Re-check every stored mixture; returns ``{"mixtures": n, "violations": [...]}``."""
    out_dir = Path(out_dir)
    cfg_path = out_dir / "config.json"
    cfg = BuildConfig.from_dict(json.loads(cfg_path.read_text())) if cfg_path.exists() else BuildConfig()
    thresholds = cfg.threshold_values()
    emotion_map = cfg.emotion_map or DEFAULT_EMOTION_MAP
    violations = []
    n = 0
    manifests = sorted((out_dir / "mixtures").glob("*/manifest.jsonl"))
    if not manifests:
        violations.append({"id": None, "problem": f"no manifests under {out_dir / 'mixtures'}"})
    for manifest in manifests:
        for row in _read_jsonl(manifest):
            n += 1
            for problem in validate_record(row, out_dir, thresholds, emotion_map):
                violations.append({"id": row.get("id"), "problem": problem})
    return {"mixtures": n, "violations": violations}


# ---------------------------------------------------------------- prompts-only regeneration


def regenerate_prompts(out_dir, master_seed: int | None = None, rephrase_url: str | None = None,
                       rephrase_cache=None) -> int:
    """Rebuild the prompt bundles of an existing dataset in place; returns mixtures touched."""
    out_dir = Path(out_dir)
    client = RephraseClient(url=rephrase_url or "", cache_dir=rephrase_cache) if rephrase_url else None
    n = 0
    for manifest in sorted((out_dir / "mixtures").glob("*/manifest.jsonl")):
        rows = _read_jsonl(manifest)
        for row in rows:
            seed = master_seed if master_seed is not None else row["plan"].get("seed") or 0
            cues = RelativeCueSet.from_dict(row["cues"])
            bundle = generate_bundle(cues, stream(seed, "prompts-regen", row["id"]), row["id"])
            out = _prompt_rows(bundle, client)
            row["prompts"] = out
            row["phrasebook_version"] = PHRASEBOOK_VERSION
            n += 1
        _write_jsonl(manifest, rows)
    return n
