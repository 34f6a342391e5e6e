"""Per-utterance speech attributes."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..audio import SAMPLE_RATE
from .pitch import F0Track, UnvoicedError, compute_pitch_stats, estimate_f0_track
from .speech import (
    NoSpeechError,
    NoSyllablesError,
    active_power_db,
    count_syllables,
    speaking_duration,
    speaking_rate,
)
from .vad import detect_active_regions

__all__ = [
    "AttributeProfile",
    "F0Track",
    "NoSpeechError",
    "NoSyllablesError",
    "UnvoicedError",
    "active_power_db",
    "compute_pitch_stats",
    "count_syllables",
    "detect_active_regions",
    "estimate_f0_track",
    "measure_attributes",
    "speaking_duration",
    "speaking_rate",
]


@dataclass
class AttributeProfile:
    utterance_id: str
    mean_f0_hz: float | None
    f0_span_octaves: float | None
    active_regions: list[tuple[float, float]]
    speaking_duration_s: float
    syllable_count: int | None
    speaking_rate_sps: float | None
    active_power_db: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["active_regions"] = [list(r) for r in self.active_regions]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AttributeProfile":
        d = dict(d)
        d["active_regions"] = [tuple(r) for r in d["active_regions"]]
        return cls(**d)


def measure_attributes(
    utterance_id: str,
    samples: np.ndarray,
    regions,
    sr: int = SAMPLE_RATE,
    *,
    transcription: str | None = None,
    language: str | None = None,
    rate_duration_s: float | None = None,
) -> AttributeProfile:
    """Measure a trimmed utterance whose active ``regions`` are already known.

    ``rate_duration_s`` is the speaking duration the whole transcription
    belongs to; it differs from the measured duration when the audio was
    truncated. Pitch and rate fields are ``None`` when they cannot be measured.
    """
    duration = speaking_duration(regions)
    try:
        mean_f0, span = compute_pitch_stats(estimate_f0_track(samples, sr))
    except UnvoicedError:
        mean_f0, span = None, None

    syllables = rate = None
    if transcription and language:
        try:
            syllables = count_syllables(transcription, language)
        except NoSyllablesError:
            syllables = None
        else:
            rate = speaking_rate(syllables, rate_duration_s or duration)

    return AttributeProfile(
        utterance_id=utterance_id,
        mean_f0_hz=mean_f0,
        f0_span_octaves=span,
        active_regions=[(float(s), float(e)) for s, e in regions],
        speaking_duration_s=duration,
        syllable_count=syllables,
        speaking_rate_sps=rate,
        active_power_db=active_power_db(samples, regions, sr),
    )
