"""Template rendering, paraphrase families and per-mixture prompt bundles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .phrases import (
    ATTRIBUTE_KINDS,
    SPEAKER_KINDS,
    attribute_phrase,
    eligible_cues,
    join_list,
    speaker_head,
)

VERBS = ("extract", "isolate", "separate")
FORMS = ("imperative", "question")
N_VARIATIONS = 5

# Canonical order inside a prompt; matches the phrasing "higher pitch level and faster speaking rate".
CUE_ORDER = (
    "emotion", "gender", "language", "temporal_order", "transcription",
    "pitch_level", "pitch_range", "speaking_rate", "speaking_duration",
    "loudness", "distance", "age",
)

# (imperative, question, connective) per paraphrase family
FAMILIES = (
    ("Please {verb} {np}.", "Can you {verb} {np}?", "characterized by"),
    ("{Verb} {np} from the mixture.", "Could you {verb} {np} from the mixture?", "with"),
    ("I need you to {verb} {np}.", "Would you {verb} {np} for me?", "that has"),
    ("From this recording, {verb} {np}.", "Is it possible to {verb} {np}?", "distinguished by"),
    ("Help me {verb} {np} from the audio.", "Can you help me {verb} {np} from the audio?", "featuring"),
)


class IndistinguishablePairError(ValueError):
    """No cue separates the target from the interference."""


@dataclass
class PromptSpec:
    mixture_id: str
    cue_subset: list[tuple[str, str, str | None]]
    verb: str
    form: str
    variation_idx: int
    text: str
    roles: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mixture_id": self.mixture_id,
            "cue_subset": [list(c) for c in self.cue_subset],
            "verb": self.verb,
            "form": self.form,
            "variation_idx": self.variation_idx,
            "text": self.text,
            "roles": list(self.roles),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PromptSpec":
        return cls(
            mixture_id=d["mixture_id"],
            cue_subset=[tuple(c) for c in d["cue_subset"]],
            verb=d["verb"],
            form=d["form"],
            variation_idx=int(d["variation_idx"]),
            text=d["text"],
            roles=list(d.get("roles", [])),
        )


def noun_phrase(cues, connective: str = "characterized by") -> str:
    speaker = [c for c in cues if c[0] in SPEAKER_KINDS]
    attrs = [c for c in cues if c[0] in ATTRIBUTE_KINDS]
    head = speaker_head(speaker) if speaker else "the speaker"
    if not attrs:
        return head
    return f"{head} {connective} " + join_list([attribute_phrase(k, lab) for k, lab, _ in attrs])


def render_template(verb: str, phrases, form: str = "imperative", variation_idx: int = 0) -> str:
    """Render ``(kind, label, payload)`` cues into one prompt sentence."""
    if not phrases:
        raise ValueError("need at least one cue phrase")
    if verb not in VERBS:
        raise ValueError(f"verb must be one of {VERBS}")
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    imperative, question, connective = FAMILIES[variation_idx % N_VARIATIONS]
    template = imperative if form == "imperative" else question
    np_ = noun_phrase(list(phrases), connective)
    return template.format(verb=verb, Verb=verb.capitalize(), np=np_)


def _ordered(cues):
    return sorted(cues, key=lambda c: CUE_ORDER.index(c[0]))


def subsets_for(cues, rng: np.random.Generator):
    """(role, subset) pairs before deduplication: each cue, one random subset, all."""
    cues = _ordered(cues)
    out = [(f"individual:{c[0]}", [c]) for c in cues]
    size = int(rng.integers(1, len(cues) + 1))
    pick = sorted(rng.choice(len(cues), size=size, replace=False).tolist())
    out.append(("random", [cues[i] for i in pick]))
    out.append(("all", list(cues)))
    return out


def generate_bundle(cues, rng: np.random.Generator, mixture_id: str = "") -> list[PromptSpec]:
    """Individual, random-subset and all-cue prompts, each in every paraphrase family.

    Identical subsets are rendered once and carry all their roles.
    """
    eligible = eligible_cues(cues)
    if not eligible:
        raise IndistinguishablePairError(f"mixture {mixture_id!r}: no distinguishing cue")
    groups: dict[tuple, dict] = {}
    for role, subset in subsets_for(eligible, rng):
        verb = VERBS[int(rng.integers(len(VERBS)))]
        form = FORMS[int(rng.integers(len(FORMS)))]
        key = tuple(subset)
        if key in groups:
            groups[key]["roles"].append(role)
        else:
            groups[key] = {"subset": subset, "verb": verb, "form": form, "roles": [role]}
    bundle = []
    for g in groups.values():
        for v in range(N_VARIATIONS):
            bundle.append(PromptSpec(
                mixture_id=mixture_id,
                cue_subset=list(g["subset"]),
                verb=g["verb"],
                form=g["form"],
                variation_idx=v,
                text=render_template(g["verb"], g["subset"], g["form"], v),
                roles=list(g["roles"]),
            ))
    return bundle


def bundle_size_before_dedup(n_eligible: int) -> int:
    return (n_eligible + 2) * N_VARIATIONS


def count_roles(bundle: list[PromptSpec]) -> int:
    """Prompt count the bundle would have without deduplication."""
    return sum(len(p.roles) for p in bundle)
