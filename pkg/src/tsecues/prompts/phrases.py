"""Phrasebook: relative-cue labels to English noun phrases."""

from __future__ import annotations

import re

from ..cues import CUE_KINDS, SAME, SIMILAR, UNKNOWN

PHRASEBOOK_VERSION = "1"

LANGUAGE_NAMES = {
    "zh": "Chinese",
    "en": "English",
    "fr": "French",
    "de": "German",
    "es": "Spanish",
}

# Kinds that name the speaker (head noun phrase); the rest describe attributes.
SPEAKER_KINDS = ("emotion", "gender", "language", "temporal_order", "transcription")
ATTRIBUTE_KINDS = tuple(k for k in CUE_KINDS if k not in SPEAKER_KINDS)

ATTRIBUTE_PHRASES = {
    "pitch_level": "a {label} pitch level",
    "pitch_range": "a {label} pitch range",
    "speaking_rate": "a {label} speaking rate",
    "speaking_duration": "a {label} speaking duration",
    "loudness": "a {label} voice",
    "distance": "a {label} distance to the microphone",
    "age": "{article} {label} age",
}

EXCLUDED_LABELS = (SAME, SIMILAR, UNKNOWN)


class PhraseError(ValueError):
    pass


def sanitize_quote(text: str) -> str:
    """Transcription text safe to embed between double quotes."""
    text = text.replace('"', "'")
    return re.sub(r"\s+", " ", text).strip()


def sanitize_word(label: str) -> str:
    return re.sub(r"[^a-z]", "", label.lower())


def eligible_cues(cues) -> list[tuple[str, str, str | None]]:
    """``(kind, label, payload)`` for every cue that distinguishes the target.

    Payload is the language name, the normalized emotion word or the
    transcription text; ``None`` for the other kinds.
    """
    out = []
    for kind, label in cues.items():
        if label in EXCLUDED_LABELS:
            continue
        if kind == "language":
            payload = LANGUAGE_NAMES.get(label, label.capitalize())
        elif kind == "transcription":
            payload = sanitize_quote(label)
            if not payload:
                continue
        elif kind == "emotion":
            payload = sanitize_word(label)
            if not payload:
                continue
        else:
            payload = None
        out.append((kind, label, payload))
    return out


def _article(word: str) -> str:
    return "an" if word[:1] in "aeiou" else "a"


def cue_phrase(kind: str, label: str, payload: str | None = None) -> str:
    """Stand-alone phrase for one cue, e.g. ``"the female speaker"``."""
    if label in EXCLUDED_LABELS:
        raise PhraseError(f"label {label!r} does not distinguish the target")
    if kind == "gender":
        return f"the {label} speaker"
    if kind == "emotion":
        return f"the {payload or sanitize_word(label)} speaker"
    if kind == "language":
        return f"the speaker speaking {payload or LANGUAGE_NAMES.get(label, label)}"
    if kind == "temporal_order":
        return f"the speaker who speaks {label}"
    if kind == "transcription":
        return f'the speaker who says "{payload or sanitize_quote(label)}"'
    if kind in ATTRIBUTE_PHRASES:
        return attribute_phrase(kind, label)
    raise PhraseError(f"unknown cue kind {kind!r}")


def attribute_phrase(kind: str, label: str) -> str:
    try:
        template = ATTRIBUTE_PHRASES[kind]
    except KeyError:
        raise PhraseError(f"{kind!r} is not an attribute cue") from None
    return template.format(label=label, article=_article(label))


def speaker_head(cues: list[tuple[str, str, str | None]]) -> str:
    """Merge all speaker-naming cues into one noun phrase.

    Adjectives (emotion, gender) precede "speaker"; language follows as a
    participle; temporal order and transcription share one "who" clause.
    """
    by_kind = {k: (label, payload) for k, label, payload in cues}
    unknown = set(by_kind) - set(SPEAKER_KINDS)
    if unknown:
        raise PhraseError(f"not speaker-naming cue kinds: {sorted(unknown)}")
    words = ["the"]
    if "emotion" in by_kind:
        label, payload = by_kind["emotion"]
        words.append(payload or sanitize_word(label))
    if "gender" in by_kind:
        words.append(by_kind["gender"][0])
    words.append("speaker")
    if "language" in by_kind:
        label, payload = by_kind["language"]
        words.append(f"speaking {payload or LANGUAGE_NAMES.get(label, label)}")
    predicates = []
    if "temporal_order" in by_kind:
        predicates.append(f"speaks {by_kind['temporal_order'][0]}")
    if "transcription" in by_kind:
        label, payload = by_kind["transcription"]
        predicates.append(f'says "{payload or sanitize_quote(label)}"')
    if predicates:
        words.append("who " + " and ".join(predicates))
    return " ".join(words)


def join_list(items: list[str]) -> str:
    if len(items) == 1:
        return items[0]
    if len(items) == 2:
        return f"{items[0]} and {items[1]}"
    return ", ".join(items[:-1]) + f", and {items[-1]}"
