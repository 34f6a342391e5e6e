"""Energy-based voice activity detection with hysteresis."""

from __future__ import annotations

import numpy as np

from ..audio import SAMPLE_RATE

WINDOW_S = 0.025
HOP_S = 0.010
OPEN_DB = -35.0  # relative to the loudest frame
CLOSE_DB = -40.0
MIN_GAP_S = 0.05
MIN_REGION_S = 0.05
SILENCE_FLOOR_DB = -100.0


def frame_power_db(samples: np.ndarray, sr: int = SAMPLE_RATE,
                   window_s: float = WINDOW_S, hop_s: float = HOP_S):
    """Short-time power in dB and frame center times."""
    x = np.asarray(samples, dtype=np.float64)
    win = int(round(window_s * sr))
    hop = int(round(hop_s * sr))
    pad = win // 2
    xp = np.pad(x, (pad, pad))
    frames = np.lib.stride_tricks.sliding_window_view(xp, win)[::hop]
    n = int(np.ceil(len(x) / hop))
    frames = frames[:n]
    power = np.mean(frames**2, axis=1)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    centers = np.arange(n) * hop / sr
    return db, centers


def merge_regions(regions, min_gap: float = MIN_GAP_S, min_len: float = MIN_REGION_S):
    """Merge intervals separated by less than ``min_gap``, then drop short islands."""
    merged: list[list[float]] = []
    for s, e in sorted(regions):
        if merged and s - merged[-1][1] < min_gap:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged if e - s >= min_len]


def detect_active_regions(samples: np.ndarray, sr: int = SAMPLE_RATE, *,
                          open_db: float = OPEN_DB, close_db: float = CLOSE_DB):
    """Sorted, disjoint ``[start, end)`` speech intervals in seconds.

    A region opens when frame power rises above ``peak + open_db`` and closes
    once it falls below ``peak + close_db``.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        return []
    db, centers = frame_power_db(x, sr)
    peak = np.max(db)
    if not np.isfinite(peak) or peak < SILENCE_FLOOR_DB:
        return []
    open_th = peak + open_db
    close_th = peak + close_db
    half = HOP_S / 2.0
    total = len(x) / sr

    regions = []
    active = False
    start = 0.0
    for c, level in zip(centers, db):
        if not active and level > open_th:
            active, start = True, max(c - half, 0.0)
        elif active and level < close_th:
            active = False
            regions.append((start, c - half))
    if active:
        regions.append((start, total))
    regions = [(s, min(e, total)) for s, e in regions if e > s]
    return merge_regions(regions)
