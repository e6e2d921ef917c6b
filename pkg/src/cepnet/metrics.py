"""Instrumental measures: frame VAD, mean LSD, segmental and global SSDR.

All frame-based measures use 32 ms frames at 50 % overlap, starting at
the first sample of the file; only complete frames are evaluated.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .audio_io import AudioSignal
from .framing import periodic_hann

_POWER_FLOOR = 1e-20


@dataclass(frozen=True)
class MetricsConfig:
    vad_threshold: float = 0.1
    lsd_fft_len: int = 512
    r_min_db: float = -10.0
    r_max_db: float = 40.0
    frame_ms: float = 32.0

    def __post_init__(self) -> None:
        if self.r_min_db >= self.r_max_db:
            raise ValueError("r_min_db must be below r_max_db")

    def frame_len(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_ms * sample_rate_hz / 1000))

    def band(self, sample_rate_hz: int) -> tuple[int, int]:
        """(k_low, k_high) bins: 50-3400 Hz narrowband, 50-7000 Hz wideband."""
        K = self.lsd_fft_len
        upper = 3400.0 if sample_rate_hz == 8000 else 7000.0
        k_low = int(np.floor(K / sample_rate_hz * 50.0))
        k_high = int(np.floor(K / sample_rate_hz * upper))
        return k_low, k_high


@dataclass(frozen=True)
class MetricsReport:
    mean_lsd_db: float
    ssdr_seg_db: float
    ssdr_db: float
    active_frame_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def frame_matrix(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Complete frames at the given hop; a short file yields one zero-padded frame."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) < frame_len:
        return np.concatenate([x, np.zeros(frame_len - len(x))])[None, :]
    n = 1 + (len(x) - frame_len) // hop
    idx = np.arange(n)[:, None] * hop + np.arange(frame_len)[None, :]
    return x[idx]


def activity(frames: np.ndarray, file_mean_square: float, threshold: float) -> np.ndarray:
    """Boolean VAD per frame: frame mean square / file mean square > threshold."""
    ms = np.mean(frames * frames, axis=1)
    if file_mean_square <= 0:
        return np.zeros(len(ms), dtype=bool)
    return ms / file_mean_square > threshold


def _metric_frames(signal: AudioSignal, cfg: MetricsConfig) -> np.ndarray:
    n = cfg.frame_len(signal.sample_rate_hz)
    return frame_matrix(signal.samples, n, n // 2)


def vad(reference: AudioSignal, cfg: MetricsConfig = MetricsConfig()) -> np.ndarray:
    """Indices of active frames, decided on the reference alone."""
    x = reference.samples
    if len(x) == 0:
        raise ValueError("empty signal")
    frames = _metric_frames(reference, cfg)
    return np.flatnonzero(activity(frames, float(np.mean(x * x)), cfg.vad_threshold))


def _check_pair(reference: AudioSignal, processed: AudioSignal) -> None:
    if len(reference) != len(processed):
        raise ValueError(f"length mismatch: {len(reference)} vs {len(processed)}")
    if reference.sample_rate_hz != processed.sample_rate_hz:
        raise ValueError("sample rate mismatch")


def lsd_per_frame(reference: AudioSignal, processed: AudioSignal,
                  cfg: MetricsConfig = MetricsConfig()) -> np.ndarray:
    """Log-spectral distance (dB) for every metric frame."""
    _check_pair(reference, processed)
    rate = reference.sample_rate_hz
    w = periodic_hann(cfg.frame_len(rate))
    k_low, k_high = cfg.band(rate)
    ref = np.fft.rfft(_metric_frames(reference, cfg) * w, n=cfg.lsd_fft_len, axis=1)
    pro = np.fft.rfft(_metric_frames(processed, cfg) * w, n=cfg.lsd_fft_len, axis=1)
    pr = np.abs(ref[:, k_low:k_high + 1]) ** 2 + _POWER_FLOOR
    pp = np.abs(pro[:, k_low:k_high + 1]) ** 2 + _POWER_FLOOR
    d = 10.0 * np.log10(pr / pp)
    return np.sqrt(np.mean(d * d, axis=1))


def lsd(reference: AudioSignal, processed: AudioSignal, cfg: MetricsConfig = MetricsConfig()) -> float:
    """Mean LSD in dB over the reference's active frames (nan if none)."""
    active = vad(reference, cfg)
    if active.size == 0:
        return float("nan")
    return float(np.mean(lsd_per_frame(reference, processed, cfg)[active]))


def ssdr_per_frame(reference: AudioSignal, processed: AudioSignal,
                   cfg: MetricsConfig = MetricsConfig()) -> np.ndarray:
    """Clamped per-frame SSDR in dB for every metric frame."""
    _check_pair(reference, processed)
    ref = _metric_frames(reference, cfg)
    err = _metric_frames(processed, cfg) - ref
    es = np.sum(ref * ref, axis=1)
    ee = np.sum(err * err, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = 10.0 * np.log10(es / ee)
    raw = np.where(ee == 0, np.inf, raw)
    raw = np.where(es == 0, cfg.r_min_db, raw)
    return np.clip(raw, cfg.r_min_db, cfg.r_max_db)


def ssdr_seg(reference: AudioSignal, processed: AudioSignal, cfg: MetricsConfig = MetricsConfig()) -> float:
    active = vad(reference, cfg)
    if active.size == 0:
        return float("nan")
    return float(np.mean(ssdr_per_frame(reference, processed, cfg)[active]))


def ssdr(reference: AudioSignal, processed: AudioSignal) -> float:
    """Global SSDR over the whole file: unclamped, no VAD."""
    _check_pair(reference, processed)
    s = reference.samples
    e = processed.samples - s
    es, ee = float(np.sum(s * s)), float(np.sum(e * e))
    if ee == 0:
        return float("inf")
    if es == 0:
        return float("-inf")
    return 10.0 * np.log10(es / ee)


def evaluate(reference: AudioSignal, processed: AudioSignal,
             cfg: MetricsConfig = MetricsConfig()) -> MetricsReport:
    return MetricsReport(
        mean_lsd_db=lsd(reference, processed, cfg),
        ssdr_seg_db=ssdr_seg(reference, processed, cfg),
        ssdr_db=ssdr(reference, processed),
        active_frame_count=int(vad(reference, cfg).size),
    )
