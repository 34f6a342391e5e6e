"""Synthesis of two-speaker, text-guided target speech extraction datasets."""

from .config import BuildConfig, ConfigError, stream
from .corpus import UtteranceRecord, ingest_manifest
from .cues import RelativeCueSet, Thresholds, build_cue_set
from .mixer import MixturePlan, assemble_mixture, make_plan
from .pipeline import build_dataset, validate_dataset
from .prompts import PromptSpec, generate_bundle
from .room import RoomSpec, estimate_rt60, simulate_rir

__version__ = "0.1.0"

__all__ = [
    "BuildConfig",
    "ConfigError",
    "MixturePlan",
    "PromptSpec",
    "RelativeCueSet",
    "RoomSpec",
    "Thresholds",
    "UtteranceRecord",
    "assemble_mixture",
    "build_cue_set",
    "build_dataset",
    "estimate_rt60",
    "generate_bundle",
    "ingest_manifest",
    "make_plan",
    "simulate_rir",
    "stream",
    "validate_dataset",
]
