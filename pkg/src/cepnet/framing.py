"""Windowing into processing frames and waveform reconstruction.

Geometry (all in samples): window length ``Nw``, processing length ``P``,
shift ``Ns``. Frame ``l`` (0-based here) windows the padded input
``[l*Ns, l*Ns + Nw)`` and is zero-padded after the window up to ``P``.
The input is preceded by ``Nw - Ns`` zeros. Drop-past keeps the newest
``Ns`` samples of each frame (no added delay); OLA sums the windowed parts
at hop ``Ns`` and completes a sample ``Nw - Ns`` samples after it arrives.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .audio_io import AudioSignal


class Window(enum.Enum):
    RECT = "rect"
    PERIODIC_HANN = "hann"
    FLATTOP_HANN = "flattop"


class Reconstruction(enum.Enum):
    CONCAT = "concat"
    DROP_PAST = "drop_past"
    OLA = "ola"


@dataclass(frozen=True)
class FrameworkStructure:
    id: str
    window_len_ms: float
    processing_len_ms: float
    shift_ms: float
    window_shape: Window
    reconstruction: Reconstruction
    extra_delay_ms: float
    # length of each Hann taper of a FLATTOP_HANN window
    taper_ms: float = 0.0

    def __post_init__(self) -> None:
        if not self.shift_ms <= self.window_len_ms <= self.processing_len_ms:
            raise ValueError(f"{self.id}: need shift <= window <= processing length")

    def samples(self, ms: float, sample_rate_hz: int) -> int:
        n = ms * sample_rate_hz / 1000.0
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"{ms} ms is not an integer number of samples at {sample_rate_hz} Hz")
        return int(round(n))

    def geometry(self, sample_rate_hz: int) -> tuple[int, int, int]:
        """(window, processing, shift) lengths in samples."""
        return (
            self.samples(self.window_len_ms, sample_rate_hz),
            self.samples(self.processing_len_ms, sample_rate_hz),
            self.samples(self.shift_ms, sample_rate_hz),
        )

    def delay_samples(self, sample_rate_hz: int) -> int:
        return self.samples(self.extra_delay_ms, sample_rate_hz)

    def window(self, sample_rate_hz: int) -> np.ndarray:
        nw = self.geometry(sample_rate_hz)[0]
        if self.window_shape is Window.RECT:
            return np.ones(nw)
        if self.window_shape is Window.PERIODIC_HANN:
            return periodic_hann(nw)
        taper = self.samples(self.taper_ms, sample_rate_hz)
        h = periodic_hann(2 * taper)
        return np.concatenate([h[:taper], np.ones(nw - 2 * taper), h[taper:]])

    def overlap_sum(self, sample_rate_hz: int) -> float:
        """Constant value of the shifted-window sum (COLA constant)."""
        w = self.window(sample_rate_hz)
        ns = self.geometry(sample_rate_hz)[2]
        return float(_window_sum(w, ns).mean())


def periodic_hann(n: int) -> np.ndarray:
    i = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * i / n))


def _window_sum(w: np.ndarray, hop: int) -> np.ndarray:
    """One period of the infinitely shifted window sum."""
    total = np.zeros(hop)
    padded = np.concatenate([w, np.zeros((-len(w)) % hop)])
    for start in range(0, len(padded), hop):
        total += padded[start:start + hop]
    return total


TIME = FrameworkStructure("time", 10, 10, 10, Window.RECT, Reconstruction.CONCAT, 0)
S1 = FrameworkStructure("s1", 32, 32, 10, Window.RECT, Reconstruction.DROP_PAST, 0)
S2 = FrameworkStructure("s2", 15, 16, 5, Window.PERIODIC_HANN, Reconstruction.OLA, 10)
S3 = FrameworkStructure("s3", 20, 32, 10, Window.PERIODIC_HANN, Reconstruction.OLA, 10)
S4 = FrameworkStructure("s4", 32, 32, 20, Window.RECT, Reconstruction.DROP_PAST, 0)
S5 = FrameworkStructure("s5", 25, 32, 20, Window.FLATTOP_HANN, Reconstruction.OLA, 5, taper_ms=5)
S6 = FrameworkStructure("s6", 32, 32, 16, Window.PERIODIC_HANN, Reconstruction.OLA, 16)

STRUCTURES: dict[str, FrameworkStructure] = {s.id: s for s in (TIME, S1, S2, S3, S4, S5, S6)}


def get_structure(name: str | FrameworkStructure) -> FrameworkStructure:
    if isinstance(name, FrameworkStructure):
        return name
    key = str(name).lower()
    roman = {"i": "s1", "ii": "s2", "iii": "s3", "iv": "s4", "v": "s5", "vi": "s6"}
    key = roman.get(key, key)
    try:
        return STRUCTURES[key]
    except KeyError:
        raise ValueError(f"unknown framework structure {name!r}") from None


def latency_ms(structure: FrameworkStructure | str) -> float:
    return float(get_structure(structure).extra_delay_ms)


@dataclass(frozen=True)
class FrameSequence:
    """Processing frames of one signal; ``frames`` has shape (n_frames, P)."""

    frames: np.ndarray
    structure: FrameworkStructure
    sample_rate_hz: int
    num_samples: int

    def __post_init__(self) -> None:
        f = np.array(self.frames, dtype=np.float64, copy=True)
        if f.ndim != 2:
            raise ValueError("frames must be a 2-D array")
        f.flags.writeable = False
        object.__setattr__(self, "frames", f)

    def __len__(self) -> int:
        return self.frames.shape[0]

    def replace(self, frames: np.ndarray) -> "FrameSequence":
        """Same geometry, new (processed) frame contents."""
        return FrameSequence(frames, self.structure, self.sample_rate_hz, self.num_samples)


def frame_starts(num_samples: int, structure: FrameworkStructure, sample_rate_hz: int) -> np.ndarray:
    """Start of each frame's window in *unpadded* input coordinates (may be negative)."""
    nw, _, ns = structure.geometry(sample_rate_hz)
    delay = structure.delay_samples(sample_rate_hz)
    n_frames = -(-(num_samples + delay) // ns) if num_samples else 0
    return np.arange(n_frames) * ns - (nw - ns)


def window_segments(x: np.ndarray, structure: FrameworkStructure, sample_rate_hz: int) -> np.ndarray:
    """Unwindowed window-support segments, shape (n_frames, Nw)."""
    nw, _, ns = structure.geometry(sample_rate_hz)
    starts = frame_starts(len(x), structure, sample_rate_hz)
    if starts.size == 0:
        return np.zeros((0, nw))
    lead = nw - ns
    tail = starts[-1] + nw - len(x)
    padded = np.concatenate([np.zeros(lead), x, np.zeros(max(tail, 0))])
    idx = (starts + lead)[:, None] + np.arange(nw)[None, :]
    return padded[idx]


def analyze(signal: AudioSignal, structure: FrameworkStructure | str) -> FrameSequence:
    """Window a signal into processing frames (window then trailing zeros)."""
    structure = get_structure(structure)
    rate = signal.sample_rate_hz
    nw, p, _ = structure.geometry(rate)
    segs = window_segments(signal.samples, structure, rate) * structure.window(rate)
    frames = np.zeros((segs.shape[0], p))
    frames[:, :nw] = segs
    return FrameSequence(frames, structure, rate, len(signal))


def overlap_add(frames: FrameSequence) -> np.ndarray:
    """Raw reconstruction buffer aligned so that ``buf[t] ~ x[t - delay]``.

    Length is ``n_frames * Ns``; no saturation or truncation is applied.
    """
    st = frames.structure
    rate = frames.sample_rate_hz
    nw, p, ns = st.geometry(rate)
    f = frames.frames
    if f.shape[1] != p:
        raise ValueError(f"frame length {f.shape[1]} does not match processing length {p}")
    n = f.shape[0]
    if st.reconstruction in (Reconstruction.CONCAT, Reconstruction.DROP_PAST):
        return f[:, p - ns:].reshape(-1).copy()
    buf = np.zeros(n * ns + nw)
    for l in range(n):
        buf[l * ns:l * ns + nw] += f[l, :nw]
    buf = buf[:n * ns] / st.overlap_sum(rate)
    # samples before the first complete window sum precede the input start
    buf[:st.delay_samples(rate)] = 0.0
    return buf


def reconstruct(frames: FrameSequence, align: bool = False) -> AudioSignal:
    """Rebuild a waveform from (processed) frames.

    By default the result is the causal output stream: same length as the
    input and delayed by the structure's extra delay (leading zeros). With
    ``align=True`` the delay is removed so the output lines up with the
    input sample for sample.
    """
    rate = frames.sample_rate_hz
    buf = overlap_add(frames)
    start = frames.structure.delay_samples(rate) if align else 0
    out = buf[start:start + frames.num_samples]
    if len(out) < frames.num_samples:
        out = np.concatenate([out, np.zeros(frames.num_samples - len(out))])
    return AudioSignal.saturated(out, rate)
