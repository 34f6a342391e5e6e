import pytest
from hypothesis import given
from hypothesis import strategies as st

from factories import geometry, plan, profile, record
from tsecues.cues import (
    CUE_KINDS,
    CueError,
    RelativeCueSet,
    Thresholds,
    are_opposite,
    build_cue_set,
    classify_continuous,
    classify_discrete,
)


def _cues(tp=None, ip=None, tr=None, ir=None, **plan_kw):
    geo = plan_kw.pop("geo", geometry())
    return build_cue_set(tp or profile("t"), tr or record("t"), ip or profile("i"),
                         ir or record("i", speaker_id="i"), plan(**plan_kw), geo)


def test_all_similar_for_identical_sources():
    c = _cues()
    assert c.language == "same" and c.gender == "same"
    assert c.transcription == "unknown" and c.emotion == "unknown" and c.age == "unknown"
    for kind in ("temporal_order", "speaking_rate", "speaking_duration", "pitch_level",
                 "pitch_range", "loudness", "distance"):
        assert getattr(c, kind) == "similar"


def test_relative_divides_by_smaller():
    # 4.6 vs 4.0: 15% of the smaller value is 0.6, so the boundary is "similar"
    assert classify_continuous(4.6, 4.0, 0.15, "relative", ("faster", "slower")) == "similar"
    assert classify_continuous(4.61, 4.0, 0.15, "relative", ("faster", "slower")) == "faster"
    assert classify_continuous(4.0, 4.61, 0.15, "relative", ("faster", "slower")) == "slower"


def test_invalid_values():
    with pytest.raises(CueError):
        classify_continuous(float("nan"), 1.0, 1.0, "absolute", ("a", "b"))
    with pytest.raises(CueError):
        classify_continuous(0.0, 1.0, 0.1, "relative", ("a", "b"))
    with pytest.raises(ValueError):
        Thresholds(pitch_level_hz=0)
    with pytest.raises(ValueError):
        Thresholds.from_dict({"nope": 1})


def test_discrete():
    assert classify_discrete("Male", "male") == "same"
    assert classify_discrete("male", "female") == "male"


def test_cue_details():
    c = _cues(tr=record("t", language="zh", transcription="Hello"),
              ir=record("i", speaker_id="i", transcription="hello!", gender="male",
                        emotion="anger"),
              offsets=(0.0, 0.5), sir=4.0, geo=geometry(1.2, 0.5))
    assert c.language == "zh" and c.gender == "female"
    assert c.transcription == "same"
    assert c.emotion == "unknown"
    assert c.temporal_order == "first"
    assert c.loudness == "louder"
    assert c.distance == "farther"


def test_emotion_mapping():
    c = _cues(tr=record("t", emotion="Joy"), ir=record("i", speaker_id="i", emotion="happiness"))
    assert c.emotion == "same"
    c = _cues(tr=record("t", emotion="anger"), ir=record("i", speaker_id="i", emotion="sad"))
    assert c.emotion == "angry"


def test_zero_span_is_unknown():
    assert _cues(tp=profile("t", span=0.0)).pitch_range == "unknown"


def test_plan_mismatch_raises():
    with pytest.raises(CueError):
        _cues(geo=geometry(rir="other"))
    with pytest.raises(CueError):
        build_cue_set(profile("t"), record("x"), profile("i"), record("i"), plan(), geometry())


def test_threshold_override():
    geo = geometry(1.0, 1.3)
    p = plan()
    base = build_cue_set(profile("t"), record("t"), profile("i"), record("i", speaker_id="i"), p, geo)
    strict = build_cue_set(profile("t"), record("t"), profile("i"), record("i", speaker_id="i"), p,
                           geo, Thresholds(distance_m=0.2))
    assert base.distance == "similar" and strict.distance == "nearer"


def test_cue_set_roundtrip():
    c = _cues()
    assert RelativeCueSet.from_dict(c.to_dict()) == c
    assert [k for k, _ in c.items()] == list(CUE_KINDS)


finite = st.floats(0.05, 500, allow_nan=False)


@given(finite, finite, finite, finite, finite, finite, st.floats(-6, 6),
       st.floats(0, 3), st.floats(0, 3), finite, finite)
def test_swap_antisymmetry(f1, f2, r1, r2, d1, d2, sir, o1, o2, g1, g2):
    p1 = profile("t", f0=f1, rate=r1, duration=d1, span=f1 / 100)
    p2 = profile("i", f0=f2, rate=r2, duration=d2, span=f2 / 100)
    rec1, rec2 = record("t", age=int(f1) % 100 + 1), record("i", speaker_id="i", gender="male",
                                                           age=int(f2) % 100 + 1)
    pl = plan(offsets=(o1, o2), sir=sir)
    geo = geometry(g1, g2)
    ab = build_cue_set(p1, rec1, p2, rec2, pl, geo)
    ba = build_cue_set(p2, rec2, p1, rec1, pl.swapped(), geo)
    for kind in CUE_KINDS:
        assert are_opposite(getattr(ab, kind), getattr(ba, kind)), kind
