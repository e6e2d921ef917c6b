"""Synthetic speech-like corpus for desk-scale experiments.

A source-filter generator: a jittered glottal pulse train (or noise for
fricatives) shaped by a time-varying cascade of formant resonators, with
syllable envelopes and pauses. It is not speech, but it has what the
postprocessors care about: formant envelopes, harmonic fine structure,
a steep high-frequency roll-off and silent gaps.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import signal as sps

from .audio_io import AudioSignal, MAX_SAMPLE, write_wav

# rough (F1, F2, F3, F4) targets in Hz
VOWELS = np.array([
    (730, 1090, 2440, 3400),   # a
    (530, 1840, 2480, 3500),   # e
    (270, 2290, 3010, 3700),   # i
    (570, 840, 2410, 3300),    # o
    (300, 870, 2240, 3300),    # u
    (660, 1720, 2410, 3400),   # ae
    (490, 1350, 1690, 3300),   # er
    (640, 1190, 2390, 3400),   # uh
], dtype=np.float64)
BANDWIDTHS = np.array([60.0, 80.0, 120.0, 170.0])

_GEN_RATE = 16000
_BLOCK = 80  # 5 ms at 16 kHz; formants are updated per block


def _resonator(freq: float, bw: float, fs: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.exp(-np.pi * bw / fs)
    theta = 2 * np.pi * freq / fs
    a = np.array([1.0, -2 * r * np.cos(theta), r * r])
    return np.array([a.sum()]), a  # unit gain at DC


def _segments(rng: np.random.Generator, n_total: int) -> list[tuple[str, int]]:
    segs: list[tuple[str, int]] = [("pause", int(rng.uniform(0.1, 0.3) * _GEN_RATE))]
    used = segs[0][1]
    while used < n_total:
        if rng.random() < 0.35:
            segs.append(("fric", int(rng.uniform(0.04, 0.12) * _GEN_RATE)))
        segs.append(("vowel", int(rng.uniform(0.08, 0.28) * _GEN_RATE)))
        if rng.random() < 0.25:
            segs.append(("pause", int(rng.uniform(0.08, 0.45) * _GEN_RATE)))
        used = sum(n for _, n in segs)
    return segs


def synth_utterance(rng: np.random.Generator, duration_s: float,
                    sample_rate_hz: int = 8000, female: bool | None = None) -> np.ndarray:
    """One utterance as float samples (not yet level-adjusted)."""
    n_total = int(duration_s * _GEN_RATE)
    if female is None:
        female = bool(rng.random() < 0.5)
    f0_base = rng.uniform(170, 240) if female else rng.uniform(85, 140)
    scale = 1.15 if female else 1.0

    segs = _segments(rng, n_total)
    kind = np.empty(sum(n for _, n in segs), dtype="<U5")
    amp = np.zeros(len(kind))
    formant_track = np.zeros((len(kind), 4))
    pos = 0
    prev = VOWELS[rng.integers(len(VOWELS))] * scale
    for name, n in segs:
        kind[pos:pos + n] = name
        target = VOWELS[rng.integers(len(VOWELS))] * scale * rng.uniform(0.93, 1.07, 4)
        ramp = np.linspace(0, 1, n)[:, None] ** 0.5
        formant_track[pos:pos + n] = prev + (target - prev) * ramp
        prev = target
        if name != "pause":
            edge = min(n // 3, int(0.02 * _GEN_RATE))
            env = np.ones(n)
            env[:edge] = np.sin(np.linspace(0, np.pi / 2, edge)) ** 2
            env[n - edge:] = np.cos(np.linspace(0, np.pi / 2, edge)) ** 2
            level = 10 ** rng.uniform(-1.2, 0.0) if name == "vowel" else 10 ** rng.uniform(-2.5, -1.5)
            amp[pos:pos + n] = env * level
        pos += n
    kind, amp, formant_track = kind[:n_total], amp[:n_total], formant_track[:n_total]

    # glottal source: jittered pulse train, two-pole roll-off, lip radiation
    t = np.arange(n_total) / _GEN_RATE
    f0 = f0_base * (1 + 0.12 * np.sin(2 * np.pi * rng.uniform(0.2, 0.6) * t + rng.uniform(0, 6.3)))
    f0 *= np.linspace(1.05, 0.92, n_total)
    f0 *= 1 + 0.01 * rng.standard_normal(n_total).cumsum() / np.sqrt(np.arange(1, n_total + 1))
    phase = np.cumsum(f0 / _GEN_RATE)
    pulses = np.diff(np.floor(phase), prepend=0.0)
    b_g, a_g = sps.butter(2, 150 / (_GEN_RATE / 2))
    glottal = sps.lfilter(b_g, a_g, pulses) * 40.0
    glottal += 0.002 * rng.standard_normal(n_total)  # aspiration
    noise = rng.standard_normal(n_total)
    b_f, a_f = sps.butter(2, [2500 / (_GEN_RATE / 2), 7000 / (_GEN_RATE / 2)], btype="band")
    fric = sps.lfilter(b_f, a_f, noise)
    voiced = (kind == "vowel").astype(float)
    source = glottal * voiced + fric * (kind == "fric")

    out = np.zeros(n_total)
    zi = [np.zeros(2) for _ in range(4)]
    for start in range(0, n_total, _BLOCK):
        blk = slice(start, min(start + _BLOCK, n_total))
        y = source[blk]
        if voiced[blk].any():
            for j in range(4):
                b, a = _resonator(formant_track[start, j], BANDWIDTHS[j], _GEN_RATE)
                y, zi[j] = sps.lfilter(b, a, y, zi=zi[j])
        out[blk] = y
    out = np.diff(out, prepend=0.0) * amp  # lip radiation, syllable envelope
    if sample_rate_hz != _GEN_RATE:
        out = sps.resample_poly(out, sample_rate_hz, _GEN_RATE)
    return out


def level_rms(x: np.ndarray, target_dbfs: float = -26.0) -> np.ndarray:
    """Scale to the target RMS level relative to full scale (1.0)."""
    rms = float(np.sqrt(np.mean(np.square(x)))) if len(x) else 0.0
    if rms == 0:
        return np.asarray(x, dtype=np.float64).copy()
    y = x * (10.0 ** (target_dbfs / 20.0) / rms)
    return np.clip(y, -1.0, MAX_SAMPLE)


def make_utterances(n: int, duration_s: float, seed: int,
                    sample_rate_hz: int = 8000) -> list[AudioSignal]:
    rng = np.random.default_rng(seed)
    return [
        AudioSignal(level_rms(synth_utterance(rng, duration_s, sample_rate_hz)), sample_rate_hz)
        for _ in range(n)
    ]


def write_corpus(directory: str | Path, n: int, duration_s: float, seed: int,
                 sample_rate_hz: int = 8000, prefix: str = "utt") -> list[Path]:
    """Write ``n`` synthetic utterances as 16-bit WAVs; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, sig in enumerate(make_utterances(n, duration_s, seed, sample_rate_hz)):
        p = directory / f"{prefix}{k:03d}.wav"
        write_wav(sig, p)
        paths.append(p)
    return paths
