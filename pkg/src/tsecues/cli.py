"""Command line entry point: ``tsecues <subcommand> ...``.

Exit codes: 0 ok, 1 validation failures, 2 config or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import BuildConfig, ConfigError
from .corpus import ManifestError, write_records
from .fixtures import write_fixture_corpus
from .pipeline import BuildError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2

log = logging.getLogger("tsecues")


def _common(p: argparse.ArgumentParser, *, seed=True, jobs=False, out_help="output directory"):
    p.add_argument("--out", required=True, help=out_help)
    if seed:
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    if jobs:
        p.add_argument("--jobs", type=int, default=None, help="worker processes")


def _mix_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML or JSON build config; flags override it")
    p.add_argument("--train", type=int, help="training mixtures")
    p.add_argument("--val", type=int, help="validation mixtures")
    p.add_argument("--test", type=int, help="test mixtures")
    p.add_argument("--emotion-frac", type=float, help="share of the emotion sub-pool (0.2)")
    p.add_argument("--age-frac", type=float, help="share of the age sub-pool (0.1)")
    p.add_argument("--rir-train", type=int, help="training RIR pairs")
    p.add_argument("--rir-val", type=int, help="validation RIR pairs")
    p.add_argument("--rir-test", type=int, help="test RIR pairs")
    p.add_argument("--rephrase-url", help="paraphrase endpoint (else $TSECUES_REPHRASE_URL)")
    p.add_argument("--rephrase-cache", help="directory for cached paraphrases")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tsecues", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate manifests and assign parts and splits")
    p.add_argument("--manifest", nargs="+", required=True)
    _common(p)

    p = sub.add_parser("attributes", help="measure per-utterance attributes")
    p.add_argument("--manifest", required=True, help="input manifest or ingested records.jsonl")
    _common(p, seed=False, jobs=True, out_help="output JSONL path")

    p = sub.add_parser("rir", help="simulate a pool of RIR pairs")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--split", required=True, choices=("train", "val", "test"))
    _common(p, jobs=True)

    p = sub.add_parser("mix", help="mix from an ingested working directory")
    _common(p, jobs=True, out_help="working directory produced by 'ingest'")
    _mix_args(p)

    p = sub.add_parser("build", help="run the whole pipeline")
    p.add_argument("--manifest", nargs="+", help="input manifests (or set in --config)")
    _common(p, jobs=True)
    _mix_args(p)

    p = sub.add_parser("prompts", help="regenerate prompts for an existing dataset")
    _common(p, out_help="dataset directory")
    p.add_argument("--rephrase-url")
    p.add_argument("--rephrase-cache")

    p = sub.add_parser("validate", help="re-check a built dataset")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--json", action="store_true", help="print the full report as JSON")

    p = sub.add_parser("fixture", help="write the synthetic 40-utterance fixture corpus")
    _common(p)
    return ap


def _config_from_args(args, manifests=None) -> BuildConfig:
    data = {}
    if getattr(args, "config", None):
        data = BuildConfig.load(args.config).to_dict()
    if manifests:
        data["manifests"] = [str(Path(m).resolve()) for m in manifests]
    data["output_dir"] = args.out
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.jobs is not None:
        data["jobs"] = args.jobs
    totals = dict(data.get("totals") or {})
    rirs = dict(data.get("rir_counts") or {})
    for split in ("train", "val", "test"):
        if getattr(args, split) is not None:
            totals[split] = getattr(args, split)
        if getattr(args, f"rir_{split}") is not None:
            rirs[split] = getattr(args, f"rir_{split}")
    if totals:
        data["totals"] = totals
    if rirs:
        data["rir_counts"] = rirs
    if args.emotion_frac is not None or args.age_frac is not None:
        fr = dict(data.get("fractions") or {"emotion": 0.2, "age": 0.1})
        if args.emotion_frac is not None:
            fr["emotion"] = args.emotion_frac
        if args.age_frac is not None:
            fr["age"] = args.age_frac
        fr["plain"] = 1.0 - fr["emotion"] - fr["age"]
        if fr["plain"] < -1e-9:
            raise ConfigError("--emotion-frac + --age-frac must not exceed 1")
        fr["plain"] = max(fr["plain"], 0.0)
        data["fractions"] = fr
    if args.rephrase_url:
        data["rephrase_url"] = args.rephrase_url
    if args.rephrase_cache:
        data["rephrase_cache"] = args.rephrase_cache
    return BuildConfig.from_dict(data)


def _seed(args) -> int:
    return args.seed if args.seed is not None else 0


def cmd_ingest(args) -> int:
    records = pipeline.load_records(args.manifest, _seed(args))
    path = Path(args.out) / "corpus" / "records.jsonl"
    write_records(path, records)
    print(f"wrote {len(records)} records to {path}")
    return EXIT_OK


def cmd_attributes(args) -> int:
    from .corpus import ingest_manifest

    records = ingest_manifest(args.manifest)
    profiles = pipeline.compute_profiles(records, args.jobs or 1)
    pipeline.write_profiles(args.out, profiles)
    skipped = len(records) - len(profiles)
    print(f"wrote {len(profiles)} profiles to {args.out} ({skipped} without speech skipped)")
    return EXIT_OK


def cmd_rir(args) -> int:
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    rows = pipeline.build_rir_pool(args.split, args.count, _seed(args), Path(args.out),
                                   args.jobs or 1)
    print(f"wrote {len(rows)} RIR pairs to {Path(args.out) / 'rirs' / args.split}")
    return EXIT_OK


def cmd_mix(args) -> int:
    from .corpus import ingest_manifest

    cfg = _config_from_args(args)
    work = Path(cfg.output_dir)
    records_path = work / "corpus" / "records.jsonl"
    if not records_path.exists():
        raise ConfigError(f"{records_path} not found; run 'tsecues ingest' first")
    records = ingest_manifest(records_path)
    attr_path = work / "corpus" / "attributes.jsonl"
    if attr_path.exists():
        profiles = pipeline.load_profiles(attr_path)
    else:
        profiles = pipeline.compute_profiles(records, cfg.jobs)
        pipeline.write_profiles(attr_path, profiles)
    summary = pipeline.mix_dataset(cfg, records, profiles, reuse_rirs=True)
    _print_summary(summary)
    return EXIT_OK


def cmd_build(args) -> int:
    cfg = _config_from_args(args, args.manifest)
    if not cfg.manifests:
        raise ConfigError("no input manifests (use --manifest or the config file)")
    summary = pipeline.build_dataset(cfg)
    _print_summary(summary)
    return EXIT_OK


def cmd_prompts(args) -> int:
    n = pipeline.regenerate_prompts(args.out, args.seed, args.rephrase_url, args.rephrase_cache)
    print(f"regenerated prompts for {n} mixtures")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = pipeline.validate_dataset(args.dataset)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for v in report["violations"]:
            print(f"{v['id']}: {v['problem']}")
        print(f"{report['mixtures']} mixtures checked, {len(report['violations'])} violation(s)")
    return EXIT_INVALID if report["violations"] else EXIT_OK


def cmd_fixture(args) -> int:
    path = write_fixture_corpus(args.out, _seed(args))
    print(f"wrote fixture corpus manifest {path}")
    return EXIT_OK


def _print_summary(summary: dict) -> None:
    for split, pools in summary["mixtures"].items():
        sir = summary["sir_error_db"][split]
        print(f"{split}: {sum(pools.values())} mixtures {pools}, "
              f"max |SIR error| {sir['max_abs']:.2e} dB")


COMMANDS = {
    "ingest": cmd_ingest,
    "attributes": cmd_attributes,
    "rir": cmd_rir,
    "mix": cmd_mix,
    "build": cmd_build,
    "prompts": cmd_prompts,
    "validate": cmd_validate,
    "fixture": cmd_fixture,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ManifestError as exc:
        for line, msg in exc.errors:
            print(f"error: line {line}: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, BuildError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
