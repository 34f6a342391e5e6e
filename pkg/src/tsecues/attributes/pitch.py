"""Probabilistic YIN F0 tracking with HMM voicing decoding.

Per frame, the cumulative-mean-normalized difference function is thresholded
under a Beta(2, 18) prior over thresholds, giving a probability for each
period candidate. Candidates are mapped onto a log-frequency grid and an HMM
with voiced/unvoiced copies of every pitch bin is decoded with Viterbi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from ..audio import SAMPLE_RATE

F_MIN = 60.0
F_MAX = 450.0
FRAME_LENGTH = 1024
HOP_LENGTH = 160

N_THRESHOLDS = 100
BETA_PARAMS = (2.0, 18.0)
NO_TROUGH_PROB = 0.01
BINS_PER_SEMITONE = 10
MAX_TRANSITION_OCT_PER_S = 35.92
SWITCH_PROB = 0.01
MIN_VOICED_FRAMES = 5


class UnvoicedError(ValueError):
    """Too few voiced frames to compute pitch statistics."""


@dataclass
class F0Track:
    frame_hop_s: float
    values: np.ndarray  # Hz, NaN where unvoiced
    voicing: np.ndarray  # bool

    @property
    def voiced_values(self) -> np.ndarray:
        return self.values[self.voicing]


def _frames(x: np.ndarray, frame_length: int, hop: int) -> np.ndarray:
    pad = frame_length // 2
    x = np.pad(x, (pad, pad))
    n = 1 + (len(x) - frame_length) // hop
    return np.lib.stride_tricks.sliding_window_view(x, frame_length)[::hop][:n]


def _cmnd(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Cumulative mean normalized difference for lags 0..max_lag, per frame."""
    n = frames.shape[1]
    win = n - max_lag
    nfft = 1 << (n + win - 1).bit_length()
    # d(tau) = sum_j (x[j] - x[j+tau])^2 for j < win, via cross-correlation
    a = np.fft.rfft(frames[:, :win][:, ::-1], nfft)
    b = np.fft.rfft(frames, nfft)
    xcorr = np.fft.irfft(a * b, nfft)[:, win - 1 : win + max_lag]
    sq = np.cumsum(np.pad(frames**2, ((0, 0), (1, 0))), axis=1)
    energy_head = sq[:, win][:, None]
    lags = np.arange(max_lag + 1)
    energy_shift = sq[:, lags + win] - sq[:, lags]
    diff = np.maximum(energy_head + energy_shift - 2.0 * xcorr, 0.0)

    out = np.ones_like(diff)
    csum = np.cumsum(diff[:, 1:], axis=1)
    tiny = np.finfo(float).tiny
    ok = csum > tiny
    ratio = diff[:, 1:] * lags[1:] / np.where(ok, csum, 1.0)
    out[:, 1:] = np.where(ok, ratio, 1.0)
    return out


def _parabolic_shift(y0: np.ndarray, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
    denom = y0 - 2.0 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(np.abs(denom) > 1e-12, 0.5 * (y0 - y2) / denom, 0.0)
    return np.clip(shift, -1.0, 1.0)


def _candidate_probs(cmnd_row: np.ndarray, min_lag: int, thresholds: np.ndarray,
                     beta_probs: np.ndarray):
    """Period candidates (fractional lags) and their probabilities for one frame."""
    d = cmnd_row
    idx = np.arange(min_lag, len(d) - 1)
    is_trough = (d[idx] < d[idx - 1]) & (d[idx] <= d[idx + 1])
    troughs = idx[is_trough]
    if troughs.size == 0:
        return np.empty(0), np.empty(0)
    values = d[troughs]
    probs = np.zeros(troughs.size)
    # for each threshold, the first trough under it wins the threshold's mass
    below = values[None, :] < thresholds[:, None]
    has = below.any(axis=1)
    first = np.argmax(below, axis=1)
    np.add.at(probs, first[has], beta_probs[has])
    # thresholds with no trough below them fall back to the global minimum
    gmin = int(np.argmin(values))
    probs[gmin] += NO_TROUGH_PROB * beta_probs[~has].sum()
    shift = _parabolic_shift(d[troughs - 1], d[troughs], d[troughs + 1])
    return troughs + shift, probs


def _transition_band(n_bins: int, hop_s: float) -> np.ndarray:
    max_step = int(round(MAX_TRANSITION_OCT_PER_S * 12 * BINS_PER_SEMITONE * hop_s))
    k = np.arange(-max_step, max_step + 1)
    w = (max_step + 1 - np.abs(k)).astype(float)
    return k, np.log(w / w.sum())


def _viterbi(log_obs_v: np.ndarray, log_obs_u: np.ndarray, offsets: np.ndarray,
             log_w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Banded Viterbi over voiced/unvoiced copies of each pitch bin.

    Returns (bin index, voiced flag) per frame.
    """
    n_frames, n_bins = log_obs_v.shape
    log_stay = np.log(1.0 - SWITCH_PROB)
    log_switch = np.log(SWITCH_PROB)
    init = -np.log(2 * n_bins)
    dv = log_obs_v[0] + init
    du = log_obs_u[0] + init
    back_bin_v = np.zeros((n_frames, n_bins), dtype=np.int32)
    back_bin_u = np.zeros((n_frames, n_bins), dtype=np.int32)
    back_from_v_v = np.zeros((n_frames, n_bins), dtype=bool)
    back_from_v_u = np.zeros((n_frames, n_bins), dtype=bool)
    bins = np.arange(n_bins)

    src_idx = bins[:, None] - offsets[None, :]  # source bin for each (target bin, offset)
    src_clipped = np.clip(src_idx, 0, n_bins - 1)
    band = np.where((src_idx >= 0) & (src_idx < n_bins), log_w[None, :], -np.inf)

    def banded_max(prev: np.ndarray):
        cand = prev[src_clipped] + band
        k = np.argmax(cand, axis=1)
        return cand[bins, k], src_clipped[bins, k].astype(np.int32)

    for t in range(1, n_frames):
        mv, av = banded_max(dv)
        mu, au = banded_max(du)
        # into voiced: from voiced (stay) or unvoiced (switch)
        v_from_v = mv + log_stay
        v_from_u = mu + log_switch
        pick_v = v_from_v >= v_from_u
        new_dv = np.where(pick_v, v_from_v, v_from_u) + log_obs_v[t]
        back_from_v_v[t] = pick_v
        back_bin_v[t] = np.where(pick_v, av, au)
        # into unvoiced
        u_from_v = mv + log_switch
        u_from_u = mu + log_stay
        pick_v = u_from_v > u_from_u
        new_du = np.where(pick_v, u_from_v, u_from_u) + log_obs_u[t]
        back_from_v_u[t] = pick_v
        back_bin_u[t] = np.where(pick_v, av, au)
        dv, du = new_dv, new_du

    path_bin = np.zeros(n_frames, dtype=np.int32)
    path_voiced = np.zeros(n_frames, dtype=bool)
    if dv.max() >= du.max():
        path_bin[-1], path_voiced[-1] = int(np.argmax(dv)), True
    else:
        path_bin[-1], path_voiced[-1] = int(np.argmax(du)), False
    for t in range(n_frames - 1, 0, -1):
        b = path_bin[t]
        if path_voiced[t]:
            path_bin[t - 1] = back_bin_v[t, b]
            path_voiced[t - 1] = back_from_v_v[t, b]
        else:
            path_bin[t - 1] = back_bin_u[t, b]
            path_voiced[t - 1] = back_from_v_u[t, b]
    return path_bin, path_voiced


def estimate_f0_track(samples: np.ndarray, sr: int = SAMPLE_RATE, *,
                      f_min: float = F_MIN, f_max: float = F_MAX,
                      frame_length: int = FRAME_LENGTH,
                      hop_length: int = HOP_LENGTH) -> F0Track:
    """Track F0 over ``samples``; unvoiced frames carry NaN."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty mono waveform")
    hop_s = hop_length / sr
    min_lag = max(int(np.floor(sr / f_max)), 1)
    max_lag = min(int(np.ceil(sr / f_min)) + 1, frame_length - 2)

    frames = _frames(x, frame_length, hop_length)
    cmnd = _cmnd(frames, max_lag)

    thresholds = np.linspace(0.0, 1.0, N_THRESHOLDS + 1)
    beta_probs = np.diff(beta_dist.cdf(thresholds, *BETA_PARAMS))
    thresholds = thresholds[1:]

    n_bins = int(np.floor(12 * BINS_PER_SEMITONE * np.log2(f_max / f_min))) + 1
    bin_freqs = f_min * 2.0 ** (np.arange(n_bins) / (12 * BINS_PER_SEMITONE))

    n_frames = frames.shape[0]
    obs_v = np.zeros((n_frames, n_bins))
    for t in range(n_frames):
        lags, probs = _candidate_probs(cmnd[t], min_lag, thresholds, beta_probs)
        if lags.size == 0:
            continue
        freqs = sr / lags
        ok = (freqs >= f_min) & (freqs <= f_max)
        freqs, probs = freqs[ok], probs[ok]
        b = np.round(12 * BINS_PER_SEMITONE * np.log2(freqs / f_min)).astype(int)
        b = np.clip(b, 0, n_bins - 1)
        np.add.at(obs_v[t], b, probs)
    voiced_mass = np.clip(obs_v.sum(axis=1), 0.0, 1.0)
    obs_u = np.repeat(((1.0 - voiced_mass) / n_bins)[:, None], n_bins, axis=1)

    with np.errstate(divide="ignore"):
        log_v = np.log(obs_v)
        log_u = np.log(obs_u)
    offsets, log_w = _transition_band(n_bins, hop_s)
    path_bin, voiced = _viterbi(log_v, log_u, offsets, log_w)

    # decoded bin centers, so a steady tone yields one constant value
    values = np.full(n_frames, np.nan)
    values[voiced] = bin_freqs[path_bin[voiced]]
    return F0Track(frame_hop_s=hop_s, values=values, voicing=voiced)


def compute_pitch_stats(track: F0Track) -> tuple[float, float]:
    """(mean F0 in Hz, span in octaves as log2(P95 / P5)) over voiced frames."""
    f0 = track.voiced_values
    if f0.size < MIN_VOICED_FRAMES:
        raise UnvoicedError(f"unvoiced utterance: {f0.size} voiced frames")
    p5, p95 = np.percentile(f0, [5, 95])
    return float(np.mean(f0)), float(np.log2(p95 / p5))
