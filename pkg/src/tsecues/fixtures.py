"""Deterministic synthetic speech-like corpus for tests and desk-scale builds.

Each utterance is a sequence of harmonic "syllables" (one per vowel group of
its transcription) with a declining F0 contour, short inter-word pauses, an
occasional long pause and leading/trailing low-level noise.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .attributes.speech import count_syllables
from .audio import SAMPLE_RATE, write_audio

VOCAB = {
    "en": "the quick brown fox jumps over lazy dogs while seven bright stars shine above "
          "quiet rivers under golden morning light".split(),
    "fr": "le petit chat dort sur la table pendant que les enfants jouent dans "
          "le jardin sous un ciel bleu".split(),
    "de": "der alte mann geht heute mit seinem hund durch den stillen wald "
          "nach hause zum essen".split(),
    "es": "el perro grande corre por la playa mientras los nubes blancas pasan "
          "sobre el mar tranquilo".split(),
    "zh": list("今天天气很好我们一起去公园散步看花听鸟唱歌吃饭喝茶"),
}

# corpus name -> (language per speaker, annotation kind, transcribed)
FIXTURE_CORPORA = {
    "emofix": (["en", "en", "de", "de", "en", "de"], "emotion", True),
    "agefix": (["fr", "fr", "zh", "zh", "fr", "zh"], "age", False),
    "plainfix": (["en", "es", "es", "en", "es", "en"], None, True),
    "plainzh": (["zh", "zh"], None, True),
}
UTTERANCES_PER_SPEAKER = 2
EMOTIONS = ("happy", "angry", "sad", "neutral")


def _formant_filter(x: np.ndarray, freqs, sr: int) -> np.ndarray:
    for f, bw in freqs:
        r = np.exp(-np.pi * bw / sr)
        theta = 2 * np.pi * f / sr
        x = lfilter([1 - r], [1, -2 * r * np.cos(theta), r * r], x)
    return x


def _syllable(f0_start: float, f0_end: float, dur: float, sr: int, rng) -> np.ndarray:
    n = int(dur * sr)
    f0 = np.linspace(f0_start, f0_end, n) * (1 + 0.005 * rng.standard_normal())
    phase = 2 * np.pi * np.cumsum(f0) / sr
    x = sum(np.sin(k * phase) / k for k in range(1, 12))
    formants = [(rng.uniform(500, 900), 90), (rng.uniform(1100, 2200), 120)]
    x = _formant_filter(x, formants, sr)
    env = np.hanning(n) ** 0.5
    return x * env


def synth_utterance(words: list[str], language: str, base_f0: float, rate_scale: float,
                    rng: np.random.Generator, sr: int = SAMPLE_RATE) -> np.ndarray:
    """Speech-like signal with one voiced burst per syllable of ``words``."""
    pieces = [0.001 * rng.standard_normal(int(rng.uniform(0.2, 0.6) * sr))]
    n_syl = sum(count_syllables(w, language) for w in words)
    contour = np.linspace(1.1, 0.9, n_syl + 1) * base_f0
    k = 0
    for i, w in enumerate(words):
        for _ in range(count_syllables(w, language)):
            dur = rng.uniform(0.14, 0.22) * rate_scale
            f0a = contour[k] * (1 + 0.04 * rng.standard_normal())
            f0b = contour[k + 1] * (1 + 0.04 * rng.standard_normal())
            pieces.append(_syllable(f0a, f0b, dur, sr, rng))
            pieces.append(np.zeros(int(0.02 * sr)))
            k += 1
        if i < len(words) - 1:
            pause = 0.8 if rng.random() < 0.08 else rng.uniform(0.06, 0.2)
            pieces.append(np.zeros(int(pause * sr)))
    pieces.append(0.001 * rng.standard_normal(int(rng.uniform(0.2, 0.6) * sr)))
    x = np.concatenate(pieces)
    x = x + 0.0005 * rng.standard_normal(len(x))
    return 0.3 * x / np.max(np.abs(x))


def write_fixture_corpus(out_dir, seed: int = 0, sr: int = SAMPLE_RATE) -> Path:
    """Write 40 WAV files and ``manifest.jsonl``; returns the manifest path."""
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = []
    for corpus, (langs, kind, transcribed) in FIXTURE_CORPORA.items():
        for s, lang in enumerate(langs):
            gender = "female" if s % 2 == 0 else "male"
            base_f0 = rng.uniform(180, 240) if gender == "female" else rng.uniform(95, 140)
            rate_scale = rng.uniform(0.75, 1.35)
            age = int(rng.integers(18, 75))
            for u in range(UTTERANCES_PER_SPEAKER):
                n_words = int(rng.integers(3, 16)) if lang != "zh" else int(rng.integers(6, 26))
                vocab = VOCAB[lang]
                words = [vocab[i] for i in rng.integers(len(vocab), size=n_words)]
                x = synth_utterance(words, lang, base_f0, rate_scale, rng, sr)
                uid = f"{corpus}_s{s}_u{u}"
                path = audio_dir / f"{uid}.wav"
                write_audio(path, x, sr)
                rec = {
                    "id": uid,
                    "audio_path": f"audio/{uid}.wav",
                    "speaker_id": f"s{s}",
                    "language": lang,
                    "gender": gender,
                    "corpus": corpus,
                }
                if transcribed:
                    rec["transcription"] = ("".join(words) if lang == "zh" else " ".join(words))
                if kind == "emotion":
                    rec["emotion"] = EMOTIONS[int(rng.integers(len(EMOTIONS)))]
                elif kind == "age":
                    rec["age"] = age
                lines.append(rec)
    manifest = out_dir / "manifest.jsonl"
    with manifest.open("w", encoding="utf-8") as fh:
        for rec in lines:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    return manifest
