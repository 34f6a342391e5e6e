"""WAV I/O and resampling at the pipeline rate."""

from __future__ import annotations

from math import gcd
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

SAMPLE_RATE = 16000


def to_mono_float(data: np.ndarray) -> np.ndarray:
    """Integer PCM or float array -> float64 mono in [-1, 1]."""
    if np.issubdtype(data.dtype, np.integer):
        info = np.iinfo(data.dtype)
        if info.min == 0:  # unsigned 8-bit
            data = (data.astype(np.float64) - 128.0) / 128.0
        else:
            data = data.astype(np.float64) / float(-info.min)
    else:
        data = data.astype(np.float64)
    if data.ndim == 2:
        data = data.mean(axis=1)
    return data


def resample(samples: np.ndarray, sr_in: int, sr_out: int = SAMPLE_RATE) -> np.ndarray:
    if sr_in == sr_out:
        return samples
    g = gcd(int(sr_in), int(sr_out))
    return resample_poly(samples, sr_out // g, sr_in // g)


def read_audio(path, sr: int = SAMPLE_RATE) -> np.ndarray:
    """Read a WAV file as mono float64 at ``sr``."""
    rate, data = wavfile.read(str(path))
    return resample(to_mono_float(data), rate, sr)


def write_audio(path, samples: np.ndarray, sr: int = SAMPLE_RATE) -> None:
    """Write 32-bit float mono WAV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(str(path), sr, np.asarray(samples, dtype=np.float32))


def audio_info(path) -> tuple[int, int]:
    """(sample_rate, n_samples) without converting the data."""
    rate, data = wavfile.read(str(path), mmap=True)
    return rate, data.shape[0]
