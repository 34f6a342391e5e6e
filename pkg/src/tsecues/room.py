"""Shoebox room sampling, image-source RIR simulation and RT60 estimation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.signal import butter, sosfilt

from .audio import SAMPLE_RATE

SPEED_OF_SOUND = 343.0
SABINE_CONSTANT = 0.163  # 24 ln(10) / c, in s/m

LENGTH_RANGE = (9.0, 11.0)
WIDTH_RANGE = (9.0, 11.0)
HEIGHT_RANGE = (2.6, 3.5)
RT60_RANGE = (0.3, 0.6)
HORIZONTAL_DIST_RANGE = (0.3, 1.5)
SOURCE_HEIGHT_RANGE = (1.6, 1.9)
MIC_HEIGHT = 1.5
WALL_CLEARANCE = 0.1
RIR_PADDING_S = 0.05

# Half-width (in samples) of the Hann-windowed sinc used for fractional delays.
SINC_HALF_WIDTH = 16
# All image amplitudes are positive; without a high-pass the dense late tail
# sums coherently near DC and the decay looks too slow.
HIGHPASS_HZ = 50.0


class RoomError(ValueError):
    """Raised for rooms that cannot be simulated."""


@dataclass(frozen=True)
class RoomSpec:
    length_m: float
    width_m: float
    height_m: float
    rt60_s: float
    mic_pos: tuple[float, float, float]
    seed: int | None = None

    @property
    def dims(self) -> np.ndarray:
        return np.array([self.length_m, self.width_m, self.height_m])

    @property
    def volume(self) -> float:
        return self.length_m * self.width_m * self.height_m

    @property
    def surface(self) -> float:
        L, W, H = self.length_m, self.width_m, self.height_m
        return 2.0 * (L * W + L * H + W * H)

    def contains(self, pos, clearance: float = 0.0) -> bool:
        p = np.asarray(pos, dtype=float)
        return bool(np.all(p > clearance) and np.all(p < self.dims - clearance))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mic_pos"] = list(self.mic_pos)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RoomSpec":
        return cls(
            length_m=float(d["length_m"]),
            width_m=float(d["width_m"]),
            height_m=float(d["height_m"]),
            rt60_s=float(d["rt60_s"]),
            mic_pos=tuple(float(v) for v in d["mic_pos"]),
            seed=d.get("seed"),
        )


@dataclass
class RirPair:
    id: str
    room: RoomSpec
    src_pos_1: tuple[float, float, float]
    src_pos_2: tuple[float, float, float]
    rir_1: np.ndarray = field(repr=False)
    rir_2: np.ndarray = field(repr=False)

    @property
    def dist_1(self) -> float:
        return source_distance(self.src_pos_1, self.room.mic_pos)

    @property
    def dist_2(self) -> float:
        return source_distance(self.src_pos_2, self.room.mic_pos)

    def geometry(self) -> dict:
        """JSON-serializable description without the impulse responses."""
        return {
            "id": self.id,
            "room": self.room.to_dict(),
            "src_pos_1": list(self.src_pos_1),
            "src_pos_2": list(self.src_pos_2),
            "dist_1": self.dist_1,
            "dist_2": self.dist_2,
        }


def source_distance(src, mic) -> float:
    return float(np.linalg.norm(np.asarray(src, float) - np.asarray(mic, float)))


def horizontal_distance(src, mic) -> float:
    return float(np.linalg.norm(np.asarray(src, float)[:2] - np.asarray(mic, float)[:2]))


def sample_room(rng: np.random.Generator, seed: int | None = None) -> RoomSpec:
    L = rng.uniform(*LENGTH_RANGE)
    W = rng.uniform(*WIDTH_RANGE)
    H = rng.uniform(*HEIGHT_RANGE)
    rt60 = rng.uniform(*RT60_RANGE)
    return RoomSpec(
        length_m=float(L),
        width_m=float(W),
        height_m=float(H),
        rt60_s=float(rt60),
        mic_pos=(L / 2.0, W / 2.0, MIC_HEIGHT),
        seed=seed,
    )


def _place_one(room: RoomSpec, rng: np.random.Generator) -> tuple[float, float, float]:
    mic = np.asarray(room.mic_pos)
    while True:
        r = rng.uniform(*HORIZONTAL_DIST_RANGE)
        phi = rng.uniform(0.0, 2.0 * np.pi)
        z = rng.uniform(*SOURCE_HEIGHT_RANGE)
        pos = (float(mic[0] + r * np.cos(phi)), float(mic[1] + r * np.sin(phi)), float(z))
        if room.contains(pos, WALL_CLEARANCE):
            return pos


def place_sources(room: RoomSpec, rng: np.random.Generator):
    """Two source positions around the microphone, each drawn independently."""
    return _place_one(room, rng), _place_one(room, rng)


def absorption_coefficient(room: RoomSpec, model: str = "eyring") -> float:
    """Uniform wall energy absorption that realizes ``room.rt60_s``.

    Diffuse-field inversions: ``"sabine"`` uses alpha = 0.163 V / (S T),
    ``"eyring"`` uses alpha = 1 - exp(-0.163 V / (S T)). Both overestimate the
    image-source decay time in the low rooms sampled here; see
    :func:`calibrated_absorption`.
    """
    k = SABINE_CONSTANT * room.volume / (room.surface * room.rt60_s)
    if model == "sabine":
        alpha = k
    elif model == "eyring":
        alpha = 1.0 - math.exp(-k)
    else:
        raise ValueError(f"unknown absorption model {model!r}")
    if not 0.0 < alpha < 1.0:
        raise RoomError(
            f"absorption {alpha:.3f} is not realizable for room "
            f"{room.length_m:.2f}x{room.width_m:.2f}x{room.height_m:.2f} m "
            f"at RT60 {room.rt60_s:.3f} s"
        )
    return alpha


def _image_sources(room: RoomSpec, src: np.ndarray, max_dist: float):
    """Image positions and reflection counts for all images within ``max_dist``."""
    dims = room.dims
    axes_pos = []
    axes_refl = []
    for k in range(3):
        n_max = int(math.ceil(max_dist / (2.0 * dims[k]))) + 1
        n = np.arange(-n_max, n_max + 1)
        # q = 0: x + 2nL, |2n| reflections; q = 1: -x + 2nL, |2n - 1| reflections
        pos = np.concatenate([src[k] + 2 * n * dims[k], -src[k] + 2 * n * dims[k]])
        refl = np.concatenate([np.abs(2 * n), np.abs(2 * n - 1)])
        axes_pos.append(pos)
        axes_refl.append(refl)
    px, py, pz = np.meshgrid(*axes_pos, indexing="ij", sparse=True)
    rx, ry, rz = np.meshgrid(*axes_refl, indexing="ij", sparse=True)
    return (px, py, pz), (rx, ry, rz)


def _image_set(room: RoomSpec, src: np.ndarray, mic: np.ndarray, max_dist: float):
    """Distances and reflection counts of all images closer than ``max_dist``."""
    (px, py, pz), (rx, ry, rz) = _image_sources(room, src, max_dist)
    d = np.sqrt((px - mic[0]) ** 2 + (py - mic[1]) ** 2 + (pz - mic[2]) ** 2)
    refl = rx + ry + rz
    keep = d < max_dist
    return d[keep], refl[keep]


def _decay_t20(d: np.ndarray, refl: np.ndarray, alpha: float, n_out: int, sr: int,
               fit_range_db=(-5.0, -25.0)) -> float:
    # Energy envelope of the image set (no waveform rendering), T20 fit as in estimate_rt60.
    bins = np.minimum((d / SPEED_OF_SOUND * sr).astype(np.int64), n_out - 1)
    energy = (1.0 - alpha) ** refl / (16.0 * np.pi**2 * d**2)
    env = np.bincount(bins, weights=energy, minlength=n_out)
    edc = np.cumsum(env[::-1])[::-1]
    with np.errstate(divide="ignore"):
        edc = 10.0 * np.log10(edc / edc[0])
    hi, lo = fit_range_db
    start = int(np.argmax(edc <= hi))
    stop = int(np.argmax(edc <= lo))
    if edc[-1] > lo:
        return np.inf
    if stop <= start + 1:
        return 0.0
    t = np.arange(start, stop + 1) / sr
    slope = np.polyfit(t, edc[start : stop + 1], 1)[0]
    return float(-60.0 / slope)


def calibrated_absorption(room: RoomSpec, src_pos, mic_pos=None, sr: int = SAMPLE_RATE) -> float:
    """Absorption whose image-source energy decay has a T20 equal to ``room.rt60_s``.

    Sabine/Eyring assume a diffuse field. In low, wide rooms grazing horizontal
    paths reflect rarely and the image-source decay is much slower than those
    formulas predict, so the coefficient is solved for on the image set itself.
    """
    mic = np.asarray(room.mic_pos if mic_pos is None else mic_pos, dtype=float)
    src = np.asarray(src_pos, dtype=float)
    n_out = int(math.ceil((room.rt60_s + RIR_PADDING_S) * sr))
    d, refl = _image_set(room, src, mic, SPEED_OF_SOUND * n_out / sr)
    target = room.rt60_s

    def err(alpha: float) -> float:
        return _decay_t20(d, refl, alpha, n_out, sr) - target

    # The envelope T20 is unreliable at both ends (truncation for tiny alpha, a
    # sparse tail for near-anechoic rooms); take the first downward crossing.
    grid = np.linspace(0.05, 0.85, 33)
    errs = [err(a) for a in grid]
    for a0, a1, e0, e1 in zip(grid[:-1], grid[1:], errs[:-1], errs[1:]):
        if e0 >= 0 > e1:
            return float(brentq(err, a0, a1, xtol=1e-5))
    raise RoomError(
        f"RT60 {target:.3f} s not reachable in room "
        f"{room.length_m:.2f}x{room.width_m:.2f}x{room.height_m:.2f} m"
    )


def simulate_rir(
    room: RoomSpec,
    src_pos,
    mic_pos=None,
    sr: int = SAMPLE_RATE,
    *,
    absorption: float | None = None,
    absorption_model: str = "calibrated",
    length_s: float | None = None,
    highpass_hz: float | None = HIGHPASS_HZ,
) -> np.ndarray:
    """Image-source impulse response of a shoebox room with uniform absorption.

    Every image closer than ``c * length`` contributes a Hann-windowed sinc
    pulse scaled by ``beta ** reflections / (4 pi d)`` where
    ``beta = sqrt(1 - alpha)`` is the pressure reflection coefficient.
    ``absorption_model`` is one of ``"calibrated"``, ``"sabine"`` or ``"eyring"``
    and is ignored when ``absorption`` is given explicitly.
    """
    mic = np.asarray(room.mic_pos if mic_pos is None else mic_pos, dtype=float)
    src = np.asarray(src_pos, dtype=float)
    if not room.contains(src) or not room.contains(mic):
        raise RoomError("source and microphone must lie strictly inside the room")
    if absorption is None:
        if absorption_model == "calibrated":
            absorption = calibrated_absorption(room, src, mic, sr)
        else:
            absorption = absorption_coefficient(room, absorption_model)
    if not 0.0 < absorption <= 1.0:
        raise RoomError(f"absorption {absorption} outside (0, 1]")
    beta = math.sqrt(1.0 - absorption)

    if length_s is None:
        length_s = room.rt60_s + RIR_PADDING_S
    n_out = int(math.ceil(length_s * sr))
    d, refl = _image_set(room, src, mic, SPEED_OF_SOUND * n_out / sr)
    if beta == 0.0:
        amp = np.where(refl == 0, 1.0, 0.0) / (4.0 * np.pi * d)
    else:
        amp = beta**refl / (4.0 * np.pi * d)
    nz = amp > 0
    d, amp = d[nz], amp[nz]

    delay = d / SPEED_OF_SOUND * sr
    center = np.floor(delay).astype(np.int64)
    frac = delay - center
    taps = np.arange(-SINC_HALF_WIDTH + 1, SINC_HALF_WIDTH + 1)
    t = taps[None, :] - frac[:, None]
    window = 0.5 * (1.0 + np.cos(np.pi * t / SINC_HALF_WIDTH))
    kernel = np.sinc(t) * window * amp[:, None]
    idx = center[:, None] + taps[None, :]

    rir = np.zeros(n_out + SINC_HALF_WIDTH + 1)
    valid = (idx >= 0) & (idx < rir.size)
    np.add.at(rir, idx[valid], kernel[valid])
    rir = rir[:n_out]
    if highpass_hz:
        rir = sosfilt(butter(2, highpass_hz, "highpass", fs=sr, output="sos"), rir)
    return rir


def schroeder_curve(rir: np.ndarray) -> np.ndarray:
    """Energy decay curve in dB, normalized to 0 dB at t = 0."""
    energy = np.asarray(rir, dtype=float) ** 2
    edc = np.cumsum(energy[::-1])[::-1]
    if edc[0] <= 0.0:
        raise RoomError("impulse response has no energy")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(edc / edc[0])


def estimate_rt60(rir: np.ndarray, sr: int = SAMPLE_RATE,
                  fit_range_db: tuple[float, float] = (-5.0, -25.0)) -> float:
    """RT60 by Schroeder backward integration and a T20 line fit, extrapolated to -60 dB.

    The energy decay curve is reference-free of any noise floor, so white noise
    without decay never reaches the lower fit bound inside the buffer except at
    its last samples; such curves are rejected.
    """
    edc = schroeder_curve(rir)
    hi, lo = fit_range_db
    start = int(np.argmax(edc <= hi))
    below = edc <= lo
    if not below.any() or edc[start] > hi:
        raise RoomError(f"decay curve never reaches {lo} dB")
    stop = int(np.argmax(below))
    # a flat curve collapses to the final few samples; demand a real decay segment
    if stop - start < 2 or stop >= len(edc) - max(2, len(edc) // 20):
        raise RoomError(f"decay curve never reaches {lo} dB")
    t = np.arange(start, stop + 1) / sr
    slope, _ = np.polyfit(t, edc[start : stop + 1], 1)
    if slope >= 0:
        raise RoomError("energy decay curve is not decaying")
    return float(-60.0 / slope)


def direct_path_delay(src_pos, mic_pos, sr: int = SAMPLE_RATE) -> float:
    return source_distance(src_pos, mic_pos) / SPEED_OF_SOUND * sr


def make_rir_pair(pair_id: str, rng: np.random.Generator, sr: int = SAMPLE_RATE,
                  seed: int | None = None, absorption_model: str = "calibrated") -> RirPair:
    room = sample_room(rng, seed=seed)
    s1, s2 = place_sources(room, rng)
    return RirPair(
        id=pair_id,
        room=room,
        src_pos_1=s1,
        src_pos_2=s2,
        rir_1=simulate_rir(room, s1, sr=sr, absorption_model=absorption_model),
        rir_2=simulate_rir(room, s2, sr=sr, absorption_model=absorption_model),
    )
