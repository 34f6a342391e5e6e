"""Build configuration and named random streams."""

from __future__ import annotations

import json
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .corpus import DEFAULT_SPLIT_FRACTIONS, POOLS, SPLITS
from .cues import Thresholds

DEFAULT_TOTALS = {"train": 100_000, "val": 10_000, "test": 10_000}
DEFAULT_FRACTIONS = {"emotion": 0.2, "age": 0.1, "plain": 0.7}
DEFAULT_RIR_COUNTS = {"train": 10_000, "val": 1_000, "test": 1_000}
RETRY_BUDGET = 10


class ConfigError(ValueError):
    pass


def stream(master_seed: int, *names) -> np.random.Generator:
    """Independent generator for a named sub-stream, e.g. ``("pairs", "train", 17)``."""
    key = [int(master_seed)]
    for n in names:
        key.append(n if isinstance(n, int) else zlib.crc32(str(n).encode()))
    return np.random.default_rng(key)


def pool_counts(total: int, fractions: dict[str, float]) -> dict[str, int]:
    """Floor each pool's share, then hand out the remainder by largest fractional part."""
    if total < 0:
        raise ConfigError("counts must be non-negative")
    s = sum(fractions[p] for p in POOLS)
    if s <= 0:
        raise ConfigError("pool fractions must sum to a positive value")
    exact = {p: total * fractions[p] / s for p in POOLS}
    counts = {p: int(np.floor(exact[p])) for p in POOLS}
    rest = total - sum(counts.values())
    order = sorted(POOLS, key=lambda p: (-(exact[p] - counts[p]), POOLS.index(p)))
    for p in order[:rest]:
        counts[p] += 1
    return counts


@dataclass
class BuildConfig:
    manifests: list[str] = field(default_factory=list)
    output_dir: str = "build"
    master_seed: int = 0
    totals: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_TOTALS))
    fractions: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_FRACTIONS))
    rir_counts: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_RIR_COUNTS))
    split_fractions: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SPLIT_FRACTIONS))
    thresholds: dict[str, float] = field(default_factory=dict)
    emotion_map: dict[str, str] | None = None
    rephrase_url: str | None = None
    rephrase_cache: str | None = None
    retry_budget: int = RETRY_BUDGET
    jobs: int = 1

    def __post_init__(self):
        for name, table in (("totals", self.totals), ("rir_counts", self.rir_counts)):
            for split in SPLITS:
                table.setdefault(split, 0)
                if int(table[split]) < 0:
                    raise ConfigError(f"{name}[{split}] must be >= 0")
            unknown = set(table) - set(SPLITS)
            if unknown:
                raise ConfigError(f"unknown split(s) in {name}: {sorted(unknown)}")
        for p in POOLS:
            self.fractions.setdefault(p, 0.0)
            if self.fractions[p] < 0:
                raise ConfigError("pool fractions must be >= 0")
        if sum(self.fractions.values()) <= 0:
            raise ConfigError("pool fractions must not all be zero")
        for split in SPLITS:
            if self.totals[split] > 0 and self.rir_counts[split] <= 0:
                raise ConfigError(f"split {split!r} has mixtures but no RIR pairs")
        if self.retry_budget < 1:
            raise ConfigError("retry_budget must be >= 1")
        Thresholds.from_dict(self.thresholds)

    def counts(self) -> dict[str, dict[str, int]]:
        """Mixture count per split and sub-pool."""
        return {s: pool_counts(int(self.totals[s]), self.fractions) for s in SPLITS}

    def threshold_values(self) -> Thresholds:
        return Thresholds.from_dict(self.thresholds)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BuildConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "BuildConfig":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        base = path.parent
        if "manifests" in data:
            data["manifests"] = [str((base / m) if not Path(m).is_absolute() else m)
                                 for m in data["manifests"]]
        return cls.from_dict(data)
