"""Two-speaker reverberant mixtures with planned overlap and SIR."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from .attributes.speech import NoSpeechError, active_power_db
from .audio import SAMPLE_RATE

MAX_DURATION_S = 6.0
SHORT_SAMPLE_S = 3.0
SIR_RANGE_DB = (-6.0, 6.0)
CLIP_PEAK = 0.99


class MixError(ValueError):
    pass


@dataclass(frozen=True)
class MixturePlan:
    id: str
    source_ids: tuple[str, str]
    durations_s: tuple[float, float]
    offsets_s: tuple[float, float]
    overlap_s: float
    mixture_len_s: float
    sir_db: float
    target_idx: int
    rir_pair_id: str
    seed: int | None = None

    def swapped(self) -> "MixturePlan":
        """The same mixture described with the other source as target."""
        return replace(self, target_idx=3 - self.target_idx, sir_db=-self.sir_db)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("source_ids", "durations_s", "offsets_s"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MixturePlan":
        d = dict(d)
        for k in ("source_ids", "durations_s", "offsets_s"):
            d[k] = tuple(d[k])
        return cls(**d)


@dataclass
class MixtureAudio:
    mixture: np.ndarray
    target_reverberant: np.ndarray
    target_clean: np.ndarray
    interference_gain: float
    normalization_gain: float


def trim_and_cap(samples: np.ndarray, regions, sr: int = SAMPLE_RATE,
                 max_s: float = MAX_DURATION_S):
    """Cut to [first start, last end) then keep at most ``max_s`` seconds.

    Returns ``(samples, regions, start_s)`` with regions relative to the
    output and ``start_s`` the cut point in the original file.
    """
    if not regions:
        raise NoSpeechError("no active regions to trim to")
    a = int(round(regions[0][0] * sr))
    b = int(round(regions[-1][1] * sr))
    b = min(b, a + int(round(max_s * sr)), len(samples))
    out = np.asarray(samples[a:b])
    start = a / sr
    end = len(out) / sr
    new_regions = []
    for s, e in regions:
        s, e = max(s - start, 0.0), min(e - start, end)
        if e > s:
            new_regions.append((s, e))
    return out, new_regions, start


def plan_overlap(d1: float, d2: float, rng: np.random.Generator, sr: int = SAMPLE_RATE):
    """Offsets ``(o1, o2)`` and overlap for two trimmed durations.

    If either sample is shorter than 3 s it is placed at a random offset inside
    the longer one. Otherwise the first starts at 0 and the second ends at 6 s.
    Offsets are snapped to the sample grid.
    """
    eps = 0.5 / sr
    if d1 <= 0 or d2 <= 0:
        raise MixError(f"durations must be positive, got {d1}, {d2}")
    if d1 > MAX_DURATION_S + eps or d2 > MAX_DURATION_S + eps:
        raise MixError(f"durations must not exceed {MAX_DURATION_S} s, got {d1}, {d2}")
    if min(d1, d2) < SHORT_SAMPLE_S:
        slack = abs(d1 - d2)
        off = min(round(rng.uniform(0.0, slack) * sr) / sr, slack)
        o1, o2 = (0.0, off) if d1 >= d2 else (off, 0.0)
    else:
        o1, o2 = 0.0, round((MAX_DURATION_S - d2) * sr) / sr
    overlap = max(0.0, min(o1 + d1, o2 + d2) - max(o1, o2))
    return (o1, o2), overlap


def apply_rir(samples: np.ndarray, rir: np.ndarray) -> np.ndarray:
    """Full linear convolution (length N + M - 1)."""
    rir = np.asarray(rir, dtype=np.float64)
    if rir.size == 0:
        raise MixError("empty impulse response")
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        return np.zeros(rir.size - 1)
    return fftconvolve(x, rir, mode="full")


def scale_to_sir(target_rev: np.ndarray, interf_rev: np.ndarray, target_regions, interf_regions,
                 sir_db: float, sr: int = SAMPLE_RATE, target_offset_s: float = 0.0,
                 interf_offset_s: float = 0.0) -> float:
    """Linear interference gain realizing ``sir_db`` over the two active-region sets."""
    p_t = active_power_db(target_rev, target_regions, sr, target_offset_s)
    try:
        p_i = active_power_db(interf_rev, interf_regions, sr, interf_offset_s)
    except NoSpeechError as exc:
        raise MixError(f"silent interference: {exc}") from exc
    return float(10.0 ** ((p_t - p_i - sir_db) / 20.0))


def measure_sir(target_rev: np.ndarray, interf_rev: np.ndarray, target_regions, interf_regions,
                sr: int = SAMPLE_RATE, target_offset_s: float = 0.0,
                interf_offset_s: float = 0.0) -> float:
    return (active_power_db(target_rev, target_regions, sr, target_offset_s)
            - active_power_db(interf_rev, interf_regions, sr, interf_offset_s))


def _place(x: np.ndarray, offset_s: float, length: int, sr: int) -> np.ndarray:
    out = np.zeros(length)
    a = int(round(offset_s * sr))
    n = min(len(x), length - a)
    out[a : a + n] = x[:n]
    return out


def assemble_mixture(plan: MixturePlan, s1: np.ndarray, s2: np.ndarray, rir_1: np.ndarray,
                     rir_2: np.ndarray, regions_1, regions_2, sr: int = SAMPLE_RATE,
                     interference_gain: float | None = None) -> MixtureAudio:
    """Pad, reverberate, scale to the planned SIR and sum.

    ``regions_k`` are the clean active regions of ``s_k`` (relative to its own
    start); they are shifted by the planned offsets on the padded timeline.
    Passing ``interference_gain`` bypasses the SIR scaling.
    """
    for k, (x, d) in enumerate(((s1, plan.durations_s[0]), (s2, plan.durations_s[1])), start=1):
        if abs(len(x) - d * sr) > 1.0:
            raise MixError(f"source {k} has {len(x)} samples, plan expects {d * sr:.0f}")
    n = int(round(plan.mixture_len_s * sr))
    p1 = _place(np.asarray(s1, float), plan.offsets_s[0], n, sr)
    p2 = _place(np.asarray(s2, float), plan.offsets_s[1], n, sr)
    r1 = apply_rir(p1, rir_1)
    r2 = apply_rir(p2, rir_2)
    total = max(len(r1), len(r2))
    r1 = np.pad(r1, (0, total - len(r1)))
    r2 = np.pad(r2, (0, total - len(r2)))

    t = plan.target_idx - 1
    revs, cleans = (r1, r2), (p1, p2)
    regions = (regions_1, regions_2)
    target_rev, interf_rev = revs[t], revs[1 - t]
    if interference_gain is None:
        interference_gain = scale_to_sir(target_rev, interf_rev, regions[t], regions[1 - t],
                                         plan.sir_db, sr, plan.offsets_s[t], plan.offsets_s[1 - t])
    mixture = target_rev + interference_gain * interf_rev
    target_clean = np.pad(cleans[t], (0, total - n))

    peak = float(np.max(np.abs(mixture))) if mixture.size else 0.0
    norm = CLIP_PEAK / peak if peak > CLIP_PEAK else 1.0
    return MixtureAudio(
        mixture=mixture * norm,
        target_reverberant=target_rev * norm,
        target_clean=target_clean * norm,
        interference_gain=float(interference_gain),
        normalization_gain=float(norm),
    )


def make_plan(mixture_id: str, source_ids, durations, rir_pair_id: str,
              rng: np.random.Generator, sr: int = SAMPLE_RATE, seed: int | None = None) -> MixturePlan:
    """Draw offsets, SIR and target index for one mixture."""
    d1, d2 = durations
    offsets, overlap = plan_overlap(d1, d2, rng, sr)
    sir = float(rng.uniform(*SIR_RANGE_DB))
    target_idx = int(rng.integers(1, 3))
    length = max(offsets[0] + d1, offsets[1] + d2)
    return MixturePlan(
        id=mixture_id,
        source_ids=(source_ids[0], source_ids[1]),
        durations_s=(float(d1), float(d2)),
        offsets_s=(float(offsets[0]), float(offsets[1])),
        overlap_s=float(overlap),
        mixture_len_s=float(length),
        sir_db=sir,
        target_idx=target_idx,
        rir_pair_id=rir_pair_id,
        seed=seed,
    )
