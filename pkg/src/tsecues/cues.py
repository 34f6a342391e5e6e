"""Inter-speaker relative cues from the target speaker's point of view."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .corpus import UtteranceRecord, normalize_transcription

SAME = "same"
SIMILAR = "similar"
UNKNOWN = "unknown"

CUE_KINDS = (
    "language",
    "gender",
    "transcription",
    "emotion",
    "temporal_order",
    "age",
    "speaking_rate",
    "speaking_duration",
    "pitch_level",
    "pitch_range",
    "loudness",
    "distance",
)
DISCRETE_KINDS = ("language", "gender", "transcription", "emotion")

# (label when target exceeds interference, label when below)
CONTINUOUS_LABELS = {
    "temporal_order": ("second", "first"),  # compared on start time
    "age": ("older", "younger"),
    "speaking_rate": ("faster", "slower"),
    "speaking_duration": ("longer", "shorter"),
    "pitch_level": ("higher", "lower"),
    "pitch_range": ("wider", "narrower"),
    "loudness": ("louder", "quieter"),
    "distance": ("farther", "nearer"),
}
OPPOSITE = {}
for _pos, _neg in CONTINUOUS_LABELS.values():
    OPPOSITE[_pos], OPPOSITE[_neg] = _neg, _pos

DEFAULT_EMOTION_MAP = {
    "angry": "angry",
    "anger": "angry",
    "happy": "happy",
    "happiness": "happy",
    "joy": "happy",
    "sad": "sad",
    "sadness": "sad",
    "neutral": "neutral",
    "surprise": "surprised",
    "surprised": "surprised",
    "fear": "fearful",
    "fearful": "fearful",
    "disgust": "disgusted",
    "disgusted": "disgusted",
    "boredom": "bored",
    "bored": "bored",
}


class CueError(ValueError):
    pass


@dataclass(frozen=True)
class Thresholds:
    speaking_rate_rel: float = 0.15
    speaking_duration_rel: float = 0.15
    pitch_level_hz: float = 5.0
    pitch_range_rel: float = 0.25
    distance_m: float = 0.5
    age_years: float = 10.0
    loudness_db: float = 3.0
    temporal_order_s: float = 0.1

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"threshold {f.name} must be strictly positive")

    @classmethod
    def from_dict(cls, overrides: dict | None) -> "Thresholds":
        overrides = overrides or {}
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown threshold(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in overrides.items()})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RelativeCueSet:
    language: str
    gender: str
    transcription: str
    emotion: str
    temporal_order: str
    age: str
    speaking_rate: str
    speaking_duration: str
    pitch_level: str
    pitch_range: str
    loudness: str
    distance: str

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RelativeCueSet":
        return cls(**{k: d[k] for k in CUE_KINDS})

    def items(self):
        return [(k, getattr(self, k)) for k in CUE_KINDS]


def classify_continuous(target_val: float, interf_val: float, threshold: float,
                        mode: str, labels: tuple[str, str]) -> str:
    """Label ``labels[0]`` / ``labels[1]`` when the difference strictly exceeds ``threshold``.

    Relative mode divides the difference by the smaller value.
    """
    a, b = float(target_val), float(interf_val)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise CueError(f"non-finite attribute values {a!r}, {b!r}")
    if mode == "absolute":
        diff = abs(a - b)
    elif mode == "relative":
        if a <= 0 or b <= 0:
            raise CueError(f"relative comparison needs positive values, got {a!r}, {b!r}")
        diff = abs(a - b) / min(a, b)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if diff > threshold:
        return labels[0] if a > b else labels[1]
    return SIMILAR


def classify_discrete(target_val: str, interf_val: str) -> str:
    if str(target_val).strip().lower() == str(interf_val).strip().lower():
        return SAME
    return target_val


def _normalize_emotion(label: str, emotion_map: dict[str, str]) -> str:
    key = label.strip().lower()
    return emotion_map.get(key, key)


def _optional(target_val, interf_val, threshold, mode, kind) -> str:
    if target_val is None or interf_val is None:
        return UNKNOWN
    return classify_continuous(target_val, interf_val, threshold, mode, CONTINUOUS_LABELS[kind])


def build_cue_set(target_profile, target: UtteranceRecord, interf_profile, interf: UtteranceRecord,
                  plan, geometry, th: Thresholds | None = None,
                  emotion_map: dict[str, str] | None = None) -> RelativeCueSet:
    """All twelve relative cues for ``target`` against ``interf`` in one mixture.

    ``plan`` is a :class:`~tsecues.mixer.MixturePlan` whose ``target_idx``
    names the target among its two sources and whose ``sir_db`` is the
    target-to-interference ratio. ``geometry`` is a :class:`~tsecues.room.RirPair`
    or its ``geometry()`` dict.
    """
    th = th or Thresholds()
    emotion_map = DEFAULT_EMOTION_MAP if emotion_map is None else emotion_map
    geo = geometry if isinstance(geometry, dict) else geometry.geometry()
    if plan.rir_pair_id != geo["id"]:
        raise CueError(f"plan {plan.id!r} uses RIR pair {plan.rir_pair_id!r}, got {geo['id']!r}")
    t_idx = plan.target_idx - 1
    i_idx = 1 - t_idx
    if plan.source_ids[t_idx] != target.id or plan.source_ids[i_idx] != interf.id:
        raise CueError(f"plan {plan.id!r} sources {plan.source_ids} do not match "
                       f"target {target.id!r} / interference {interf.id!r}")
    dists = (geo["dist_1"], geo["dist_2"])

    if target.transcription and interf.transcription:
        same_text = (normalize_transcription(target.transcription)
                     == normalize_transcription(interf.transcription))
        transcription = SAME if same_text else target.transcription
    else:
        transcription = UNKNOWN

    if target.emotion and interf.emotion:
        emotion = classify_discrete(_normalize_emotion(target.emotion, emotion_map),
                                    _normalize_emotion(interf.emotion, emotion_map))
    else:
        emotion = UNKNOWN

    # the mixture's SIR is the target level minus the interference level
    loudness = classify_continuous(plan.sir_db, 0.0, th.loudness_db, "absolute",
                                   CONTINUOUS_LABELS["loudness"])

    return RelativeCueSet(
        language=classify_discrete(target.language, interf.language),
        gender=classify_discrete(target.gender, interf.gender),
        transcription=transcription,
        emotion=emotion,
        temporal_order=classify_continuous(plan.offsets_s[t_idx], plan.offsets_s[i_idx],
                                           th.temporal_order_s, "absolute",
                                           CONTINUOUS_LABELS["temporal_order"]),
        age=_optional(target.age, interf.age, th.age_years, "absolute", "age"),
        speaking_rate=_optional(target_profile.speaking_rate_sps, interf_profile.speaking_rate_sps,
                                th.speaking_rate_rel, "relative", "speaking_rate"),
        speaking_duration=classify_continuous(
            target_profile.speaking_duration_s, interf_profile.speaking_duration_s,
            th.speaking_duration_rel, "relative", CONTINUOUS_LABELS["speaking_duration"]),
        pitch_level=_optional(target_profile.mean_f0_hz, interf_profile.mean_f0_hz,
                              th.pitch_level_hz, "absolute", "pitch_level"),
        pitch_range=_span_cue(target_profile.f0_span_octaves, interf_profile.f0_span_octaves,
                              th.pitch_range_rel),
        loudness=loudness,
        distance=classify_continuous(dists[t_idx], dists[i_idx], th.distance_m, "absolute",
                                     CONTINUOUS_LABELS["distance"]),
    )


def _span_cue(target_span, interf_span, threshold) -> str:
    # A span of exactly zero (monotone speech) makes the relative difference undefined.
    if target_span is None or interf_span is None or target_span <= 0 or interf_span <= 0:
        return UNKNOWN
    return classify_continuous(target_span, interf_span, threshold, "relative",
                               CONTINUOUS_LABELS["pitch_range"])


def are_opposite(label_ab: str, label_ba: str) -> bool:
    """True when two labels are consistent under a target/interference swap."""
    if label_ab in (SIMILAR, SAME, UNKNOWN) or label_ba in (SIMILAR, SAME, UNKNOWN):
        return label_ab == label_ba
    if label_ab in OPPOSITE:
        return OPPOSITE[label_ab] == label_ba
    # discrete attribute values: each side names its own value
    return True
