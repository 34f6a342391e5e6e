"""Small builders shared by the tests."""

from __future__ import annotations

import numpy as np

from tsecues.attributes import AttributeProfile
from tsecues.corpus import UtteranceRecord
from tsecues.mixer import MixturePlan

SR = 16000


def profile(uid="u", f0=150.0, span=0.5, duration=3.0, rate=4.0, power=-20.0, regions=None):
    return AttributeProfile(
        utterance_id=uid,
        mean_f0_hz=f0,
        f0_span_octaves=span,
        active_regions=regions or [(0.0, duration)],
        speaking_duration_s=duration,
        syllable_count=None if rate is None else int(rate * duration),
        speaking_rate_sps=rate,
        active_power_db=power,
    )


def record(uid="u", **kw):
    base = dict(id=uid, audio_path=f"/nonexistent/{uid}.wav", speaker_id=uid, language="en",
                gender="female", corpus="c")
    base.update(kw)
    return UtteranceRecord(**base)


def plan(target_id="t", interf_id="i", *, offsets=(0.0, 0.0), sir=0.0, target_idx=1,
         rir="r0", durations=(3.0, 3.0)):
    """Plan with ``source_ids`` ordered so that ``target_idx`` points at ``target_id``."""
    ids = (target_id, interf_id) if target_idx == 1 else (interf_id, target_id)
    length = max(offsets[0] + durations[0], offsets[1] + durations[1])
    overlap = max(0.0, min(offsets[0] + durations[0], offsets[1] + durations[1])
                  - max(offsets))
    return MixturePlan(id="m", source_ids=ids, durations_s=durations, offsets_s=offsets,
                       overlap_s=overlap, mixture_len_s=length, sir_db=sir,
                       target_idx=target_idx, rir_pair_id=rir)


def geometry(d1=1.0, d2=1.0, rir="r0"):
    return {"id": rir, "dist_1": d1, "dist_2": d2}


def tone(freq, seconds=1.0, amp=0.5, sr=SR):
    t = np.arange(int(seconds * sr)) / sr
    return amp * np.sin(2 * np.pi * freq * t)
