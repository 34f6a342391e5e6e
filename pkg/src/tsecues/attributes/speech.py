"""Speaking duration, syllable counting, speaking rate and active-region power."""

from __future__ import annotations

import re
import unicodedata

import numpy as np

from ..audio import SAMPLE_RATE

MAX_NATURAL_PAUSE_S = 0.6
_EPS = 1e-9

LANGUAGES = ("zh", "en", "fr", "de", "es")

# "y" is deliberately absent
_VOWELS = set("aeiou" "àáâãäåæ" "èéêë" "ìíîï" "òóôõöøœ" "ùúûü")
_HAN = re.compile(r"[\u3400-\u4dbf\u4e00-\u9fff\uf900-\ufaff\U00020000-\U0002ebef]")
_WORD = re.compile(r"[^\W\d_]+")


class NoSpeechError(ValueError):
    """No active speech regions where some were required."""


class NoSyllablesError(ValueError):
    """Text contains nothing countable as a syllable."""


def speaking_duration(regions) -> float:
    """Region lengths plus every inter-region pause of at most 0.6 s."""
    if not regions:
        raise NoSpeechError("no speech detected")
    total = sum(e - s for s, e in regions)
    for (_, prev_end), (start, _) in zip(regions[:-1], regions[1:]):
        gap = start - prev_end
        if gap <= MAX_NATURAL_PAUSE_S + _EPS:
            total += gap
    return float(total)


def count_syllables(text: str, language: str) -> int:
    if language not in LANGUAGES:
        raise ValueError(f"unsupported language {language!r}")
    text = unicodedata.normalize("NFC", text).lower()
    if language == "zh":
        n = len(_HAN.findall(text))
    else:
        if language == "de":
            text = text.replace("ß", "ss")
        n = 0
        for token in _WORD.findall(text):
            in_run = False
            for ch in token:
                if ch in _VOWELS:
                    if not in_run:
                        n += 1
                    in_run = True
                else:
                    in_run = False
    if n < 1:
        raise NoSyllablesError(f"no countable syllables in {text!r}")
    return n


def speaking_rate(syllables: int, duration: float) -> float:
    if duration <= 0:
        raise ValueError("speaking duration must be positive")
    if syllables < 1:
        raise ValueError("need at least one syllable")
    return syllables / duration


def region_mask(n_samples: int, regions, sr: int = SAMPLE_RATE, offset_s: float = 0.0) -> np.ndarray:
    """Boolean sample mask for ``regions`` shifted by ``offset_s``."""
    mask = np.zeros(n_samples, dtype=bool)
    for s, e in regions:
        a = max(int(round((s + offset_s) * sr)), 0)
        b = min(int(round((e + offset_s) * sr)), n_samples)
        if b > a:
            mask[a:b] = True
    return mask


def active_power_db(samples: np.ndarray, regions, sr: int = SAMPLE_RATE,
                    offset_s: float = 0.0) -> float:
    """10 log10 of the mean squared sample over the active regions."""
    if not regions:
        raise NoSpeechError("no active regions")
    x = np.asarray(samples, dtype=np.float64)
    mask = region_mask(len(x), regions, sr, offset_s)
    if not mask.any():
        raise NoSpeechError("active regions fall outside the signal")
    power = np.mean(x[mask] ** 2)
    if power <= 0:
        raise NoSpeechError("signal is silent over its active regions")
    return float(10.0 * np.log10(power))
