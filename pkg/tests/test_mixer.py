import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from factories import SR, plan, tone
from tsecues.mixer import (
    MixError,
    MixturePlan,
    apply_rir,
    assemble_mixture,
    make_plan,
    measure_sir,
    plan_overlap,
    trim_and_cap,
)


def test_trim_and_cap():
    x = np.arange(10 * SR, dtype=float)
    out, regions, start = trim_and_cap(x, [(1.0, 2.0), (3.0, 9.5)])
    assert start == 1.0 and len(out) == 6 * SR
    assert regions == [(0.0, 1.0), (2.0, 6.0)]
    assert out[0] == SR


def test_naive_convolution_oracle():
    rng = np.random.default_rng(0)
    x, h = rng.standard_normal(300), rng.standard_normal(40)
    np.testing.assert_allclose(apply_rir(x, h), np.convolve(x, h), atol=1e-10)
    with pytest.raises(MixError):
        apply_rir(x, [])


grid = st.integers(2, 24).map(lambda k: k * 0.25)


@given(grid, grid, st.integers(0, 2**32 - 1))
def test_overlap_rules(d1, d2, seed):
    (o1, o2), ov = plan_overlap(d1, d2, np.random.default_rng(seed))
    end = max(o1 + d1, o2 + d2)
    assert end <= 6.0 + 1e-9
    assert ov == pytest.approx(max(0.0, min(o1 + d1, o2 + d2) - max(o1, o2)))
    if min(d1, d2) < 3.0:
        assert end == pytest.approx(max(d1, d2))
        assert ov == pytest.approx(min(d1, d2))
    else:
        assert o1 == 0.0 and o2 + d2 == pytest.approx(6.0)
    assert o1 * SR == pytest.approx(round(o1 * SR)) and o2 * SR == pytest.approx(round(o2 * SR))


def test_overlap_rejects_bad_durations():
    with pytest.raises(MixError):
        plan_overlap(0.0, 2.0, np.random.default_rng(0))
    with pytest.raises(MixError):
        plan_overlap(7.0, 2.0, np.random.default_rng(0))


def _sources(rng, d1=2.0, d2=4.0):
    s1 = tone(180.0, d1) * (1 + 0.1 * rng.standard_normal(int(d1 * SR)))
    s2 = tone(120.0, d2) * 0.2
    return s1, s2, [(0.1, d1 - 0.1)], [(0.2, d2 - 0.3)]


@given(st.floats(-6, 6), st.integers(1, 2), st.integers(0, 1000))
def test_sir_roundtrip(sir, target_idx, seed):
    rng = np.random.default_rng(seed)
    s1, s2, r1, r2 = _sources(rng)
    rir_1 = np.exp(-np.arange(800) / 100.0) * rng.standard_normal(800)
    rir_2 = np.exp(-np.arange(800) / 100.0) * rng.standard_normal(800)
    p = plan("a", "b", offsets=(1.0, 0.0), durations=(2.0, 4.0), sir=sir, target_idx=target_idx)
    a = assemble_mixture(p, s1, s2, rir_1, rir_2, r1, r2)
    t = target_idx - 1
    regions = (r1, r2)
    got = measure_sir(a.target_reverberant, a.mixture - a.target_reverberant, regions[t],
                      regions[1 - t], SR, p.offsets_s[t], p.offsets_s[1 - t])
    assert got == pytest.approx(sir, abs=1e-6)
    assert np.max(np.abs(a.mixture)) <= 0.99 + 1e-12


def test_additivity_and_clip_guard():
    rng = np.random.default_rng(0)
    s1, s2, r1, r2 = _sources(rng)
    s1 = 50 * s1
    p = plan("a", "b", offsets=(1.0, 0.0), durations=(2.0, 4.0), sir=0.0)
    a = assemble_mixture(p, s1, s2, [1.0], [1.0], r1, r2)
    assert a.normalization_gain < 1
    assert np.max(np.abs(a.mixture)) == pytest.approx(0.99)
    n = a.normalization_gain
    interf = np.zeros(len(a.mixture))
    interf[: len(s2)] = s2
    np.testing.assert_allclose(a.mixture / n, a.target_reverberant / n + a.interference_gain * interf,
                               atol=1e-9)
    np.testing.assert_allclose(a.target_clean, a.target_reverberant)


def test_assemble_rejects_length_mismatch():
    p = plan("a", "b", durations=(1.0, 1.0))
    with pytest.raises(MixError):
        assemble_mixture(p, np.ones(10), np.ones(SR), [1.0], [1.0], [(0, 1)], [(0, 1)])


def test_make_plan_deterministic_and_roundtrip():
    p = make_plan("m", ("a", "b"), (2.5, 5.0), "r", np.random.default_rng(5), seed=5)
    assert p == make_plan("m", ("a", "b"), (2.5, 5.0), "r", np.random.default_rng(5), seed=5)
    assert MixturePlan.from_dict(p.to_dict()) == p
    assert -6 <= p.sir_db <= 6 and p.target_idx in (1, 2)
    s = p.swapped()
    assert s.target_idx == 3 - p.target_idx and s.sir_db == -p.sir_db
