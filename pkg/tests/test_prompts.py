import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tsecues.cues import CUE_KINDS, CONTINUOUS_LABELS, RelativeCueSet
from tsecues.prompts import (
    IndistinguishablePairError,
    PromptSpec,
    bundle_size_before_dedup,
    count_roles,
    cue_phrase,
    eligible_cues,
    generate_bundle,
    is_valid_prompt,
    parse_prompt,
    render_template,
)
from tsecues.prompts.phrases import PhraseError

ALL_SIMILAR = dict(language="same", gender="same", transcription="unknown", emotion="unknown",
                   temporal_order="similar", age="unknown", speaking_rate="similar",
                   speaking_duration="similar", pitch_level="similar", pitch_range="similar",
                   loudness="similar", distance="similar")


def cueset(**kw):
    return RelativeCueSet(**{**ALL_SIMILAR, **kw})


def test_known_renderings():
    cues = [("gender", "female", None), ("pitch_level", "higher", None),
            ("speaking_rate", "faster", None)]
    assert render_template("extract", cues, "imperative", 0) == \
        "Please extract the female speaker characterized by a higher pitch level and a faster speaking rate."
    assert render_template("isolate", [("temporal_order", "first", None)], "question", 0) == \
        "Can you isolate the speaker who speaks first?"
    assert render_template("extract", [("loudness", "louder", None)], "imperative", 0) == \
        "Please extract the speaker characterized by a louder voice."


def test_cue_phrase():
    assert cue_phrase("language", "zh", "Chinese") == "the speaker speaking Chinese"
    assert cue_phrase("age", "older") == "an older age"
    with pytest.raises(PhraseError):
        cue_phrase("gender", "same")


def test_eligible_excludes_same_similar_unknown():
    c = cueset(language="fr", transcription='he said "hi"', loudness="quieter")
    el = eligible_cues(c)
    assert [k for k, _, _ in el] == ["language", "transcription", "loudness"]
    assert el[0][2] == "French" and '"' not in el[1][2]


def test_indistinguishable():
    with pytest.raises(IndistinguishablePairError):
        generate_bundle(cueset(), np.random.default_rng(0))


def test_dedup_single_cue():
    b = generate_bundle(cueset(gender="male"), np.random.default_rng(0), "m")
    # individual, random and all subsets coincide
    assert len(b) == 5
    assert count_roles(b) == bundle_size_before_dedup(1) == 15
    assert {p.variation_idx for p in b} == set(range(5))


def test_full_bundle():
    c = cueset(language="en", gender="female", transcription="good morning", emotion="happy",
               temporal_order="first", age="older", speaking_rate="faster",
               speaking_duration="longer", pitch_level="higher", pitch_range="wider",
               loudness="louder", distance="nearer")
    b = generate_bundle(c, np.random.default_rng(1), "m")
    assert count_roles(b) == 70
    assert all(is_valid_prompt(p.text) for p in b)
    assert PromptSpec.from_dict(b[0].to_dict()) == b[0]


def test_grammar_rejects_off_template():
    assert not is_valid_prompt("Please identify the female speaker.")
    assert not is_valid_prompt("Please extract the similar speaker.")
    assert not is_valid_prompt("Please extract the speaker characterized by a similar voice.")
    assert parse_prompt("Help me separate the sad male speaker speaking German from the audio.")


def _label(kind):
    if kind in CONTINUOUS_LABELS:
        return st.sampled_from(list(CONTINUOUS_LABELS[kind]) + ["similar"] +
                               (["unknown"] if kind in ("age", "pitch_range", "speaking_rate",
                                                        "pitch_level") else []))
    return {
        "language": st.sampled_from(["same", "en", "zh", "fr", "de", "es"]),
        "gender": st.sampled_from(["same", "male", "female"]),
        "emotion": st.sampled_from(["same", "unknown", "happy", "angry", "sad", "neutral"]),
        "transcription": st.one_of(st.sampled_from(["same", "unknown"]),
                                   st.text(alphabet="abc xyz,'\"", min_size=1, max_size=20)),
    }[kind]


cue_sets = st.builds(lambda d: RelativeCueSet(**d), st.fixed_dictionaries({k: _label(k) for k in CUE_KINDS}))


@given(cue_sets, st.integers(0, 2**32 - 1))
def test_bundle_properties(c, seed):
    el = eligible_cues(c)
    if not el:
        with pytest.raises(IndistinguishablePairError):
            generate_bundle(c, np.random.default_rng(seed))
        return
    b = generate_bundle(c, np.random.default_rng(seed))
    assert count_roles(b) == bundle_size_before_dedup(len(el))
    allowed = set(el)
    for p in b:
        assert set(p.cue_subset) <= allowed
        assert is_valid_prompt(p.text), p.text
