"""Mono 16-bit PCM WAV I/O and the normalized float signal type."""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_RATES = (8000, 16000)
PCM_SCALE = 32768.0
# Largest double strictly below 1.0; upper bound of the legal sample range.
MAX_SAMPLE = float(np.nextafter(1.0, 0.0))


class WavFormatError(ValueError):
    """The file is a WAV but not mono / 16-bit / 8 or 16 kHz."""


class CorruptWavError(ValueError):
    """The file is not a readable RIFF/WAVE container or is truncated."""


@dataclass(frozen=True)
class AudioSignal:
    """Mono signal with samples in [-1, 1) at 8 or 16 kHz."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {x.shape}")
        if self.sample_rate_hz not in SUPPORTED_RATES:
            raise ValueError(f"unsupported sample rate {self.sample_rate_hz}")
        if x.size and not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        if x.size and (x.min() < -1.0 or x.max() >= 1.0):
            raise ValueError("samples must lie in [-1, 1)")
        x = x.copy()
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)

    @classmethod
    def saturated(cls, samples: np.ndarray, sample_rate_hz: int) -> "AudioSignal":
        """Build a signal, clamping out-of-range samples to [-1, 1)."""
        x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, MAX_SAMPLE)
        return cls(x, sample_rate_hz)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz


def to_int16(samples: np.ndarray) -> np.ndarray:
    """Quantize normalized samples: round half away from zero, then saturate."""
    scaled = np.asarray(samples, dtype=np.float64) * PCM_SCALE
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(rounded, -32768, 32767).astype(np.int16)


def from_int16(pcm: np.ndarray) -> np.ndarray:
    return np.asarray(pcm, dtype=np.int16).astype(np.float64) / PCM_SCALE


def read_wav(path: str | Path) -> AudioSignal:
    """Read a mono 16-bit PCM WAV file.

    Raises WavFormatError for legal WAVs in an unsupported layout and
    CorruptWavError for anything that cannot be parsed completely.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            nframes = wf.getnframes()
            if channels != 1:
                raise WavFormatError(f"{path}: expected mono, got {channels} channels")
            if width != 2:
                raise WavFormatError(f"{path}: expected 16-bit samples, got {8 * width}-bit")
            if rate not in SUPPORTED_RATES:
                raise WavFormatError(f"{path}: unsupported sample rate {rate}")
            data = wf.readframes(nframes)
    except wave.Error as exc:
        msg = str(exc)
        if "unknown format" in msg:
            raise WavFormatError(f"{path}: {msg}") from exc
        raise CorruptWavError(f"{path}: {msg}") from exc
    except EOFError as exc:
        raise CorruptWavError(f"{path}: truncated header") from exc
    if len(data) != 2 * nframes:
        raise CorruptWavError(
            f"{path}: data chunk declares {nframes} samples, found {len(data) // 2}"
        )
    pcm = np.frombuffer(data, dtype="<i2")
    return AudioSignal(from_int16(pcm), rate)


def write_wav(signal: AudioSignal, path: str | Path) -> None:
    pcm = to_int16(signal.samples).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(signal.sample_rate_hz)
        wf.writeframes(pcm.tobytes())
