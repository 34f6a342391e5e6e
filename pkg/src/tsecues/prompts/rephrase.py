"""Optional paraphrasing through an external HTTP endpoint, with offline fallback.

Protocol: ``POST <url>`` with JSON ``{"prompt": str, "n": int}``; the reply is
``{"variations": [str, ...]}``. The URL and an optional bearer token come from
``TSECUES_REPHRASE_URL`` and ``TSECUES_REPHRASE_TOKEN``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .render import N_VARIATIONS, PromptSpec, render_template

log = logging.getLogger(__name__)

URL_ENV = "TSECUES_REPHRASE_URL"
TOKEN_ENV = "TSECUES_REPHRASE_TOKEN"
ACTION_VERBS = ("extract", "separate", "isolate")
FORBIDDEN_WORDS = ("identify", "locate")

# accepted spellings per cue label, beyond the label itself
_LABEL_SYNONYMS = {
    "nearer": ("nearer", "closer"),
    "farther": ("farther", "further"),
    "faster": ("faster", "quicker"),
    "quieter": ("quieter", "softer"),
}
_NOUN_KEYWORDS = {
    "pitch_level": ("pitch",),
    "pitch_range": ("range",),
    "speaking_rate": ("rate", "speed", "pace", "tempo"),
    "speaking_duration": ("duration", "long", "length", "time"),
    "distance": ("distance", "microphone", "mic"),
    "age": ("age", "old", "young"),
}


def cue_keywords(cue_subset) -> list[tuple[str, ...]]:
    """One tuple of acceptable alternatives per keyword a paraphrase must keep."""
    groups = []
    for kind, label, payload in cue_subset:
        if kind == "transcription":
            groups.append((payload or label,))
        elif kind == "language":
            groups.append((payload or label,))
        elif kind == "emotion":
            groups.append((payload or label,))
        else:
            groups.append(_LABEL_SYNONYMS.get(label, (label,)))
        if kind in _NOUN_KEYWORDS:
            groups.append(_NOUN_KEYWORDS[kind])
    return groups


def _words(text: str) -> set[str]:
    return set(re.findall(r"[a-z]+", text.lower()))


def validate_variation(text: str, keywords: list[tuple[str, ...]]) -> bool:
    if not isinstance(text, str) or not text.strip():
        return False
    lower = text.lower()
    words = _words(text)
    if not any(v in words for v in ACTION_VERBS):
        return False
    if any(w in words for w in FORBIDDEN_WORDS):
        return False
    for alternatives in keywords:
        if not any((a.lower() in words) if a.isalpha() else (a.lower() in lower) for a in alternatives):
            return False
    return True


class RephraseClient:
    """HTTP client with on-disk cache, retries and keyword validation."""

    def __init__(self, url: str | None = None, token: str | None = None,
                 cache_dir=None, timeout: float = 30.0, retries: int = 2,
                 max_workers: int = 4):
        self.url = url if url is not None else os.environ.get(URL_ENV)
        self.token = token if token is not None else os.environ.get(TOKEN_ENV)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.timeout = timeout
        self.retries = retries
        self.max_workers = max_workers

    @property
    def enabled(self) -> bool:
        return bool(self.url)

    def _cache_path(self, text: str, n: int) -> Path | None:
        if not self.cache_dir:
            return None
        key = hashlib.sha256(f"{n}\n{text}".encode()).hexdigest()
        return self.cache_dir / f"{key}.json"

    def _request(self, text: str, n: int) -> list[str]:
        cached = self._cache_path(text, n)
        if cached and cached.exists():
            return json.loads(cached.read_text(encoding="utf-8"))["variations"]
        body = json.dumps({"prompt": text, "n": n}).encode()
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                req = urllib.request.Request(self.url, data=body, headers=headers, method="POST")
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                variations = payload["variations"]
                if not isinstance(variations, list):
                    raise ValueError("'variations' is not a list")
                if cached:
                    cached.parent.mkdir(parents=True, exist_ok=True)
                    cached.write_text(json.dumps({"variations": variations}), encoding="utf-8")
                return variations
            except (urllib.error.URLError, OSError, ValueError, KeyError) as exc:
                last = exc
                if attempt < self.retries:
                    time.sleep(0.5 * 2**attempt)
        raise ConnectionError(f"rephrase endpoint failed: {last}")

    def rephrase(self, spec: PromptSpec, n: int = N_VARIATIONS) -> list[str]:
        """``n`` paraphrases of ``spec``; invalid or missing ones fall back to built-ins."""
        fallback = [render_template(spec.verb, spec.cue_subset, spec.form, v) for v in range(n)]
        if not self.enabled:
            return fallback
        try:
            variations = self._request(spec.text, n)
        except ConnectionError as exc:
            log.warning("%s; using built-in paraphrases", exc)
            return fallback
        keywords = cue_keywords(spec.cue_subset)
        out = []
        for i in range(n):
            text = variations[i] if i < len(variations) else None
            if text is not None and validate_variation(text, keywords):
                out.append(text.strip())
            else:
                log.warning("rejected paraphrase %d for %r: %r", i, spec.text, text)
                out.append(fallback[i])
        return out

    def rephrase_many(self, specs: list[PromptSpec], n: int = N_VARIATIONS) -> list[list[str]]:
        if not self.enabled:
            return [self.rephrase(s, n) for s in specs]
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            return list(pool.map(lambda s: self.rephrase(s, n), specs))


def rephrase_external(spec: PromptSpec, n: int = N_VARIATIONS,
                      client: RephraseClient | None = None) -> list[str]:
    return (client or RephraseClient()).rephrase(spec, n)
