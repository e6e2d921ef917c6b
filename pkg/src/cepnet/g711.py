"""Bit-exact G.711 A-law / mu-law companding and quantization intervals.

The companding follows the ITU-T G.191 reference routines: A-law works on
the 13-bit (``>> 3``) and mu-law on the 14-bit (``>> 2``) left-justified
part of a 16-bit sample. Floats map to 16-bit by ``floor(x * 32768)`` so
that every codeword's float preimage is a half-open interval.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio_io import PCM_SCALE, AudioSignal


class G711Law(enum.Enum):
    A_LAW = "alaw"
    MU_LAW = "ulaw"

    @classmethod
    def parse(cls, value: "str | G711Law") -> "G711Law":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        aliases = {"alaw": cls.A_LAW, "a": cls.A_LAW, "ulaw": cls.MU_LAW,
                   "mulaw": cls.MU_LAW, "u": cls.MU_LAW, "mu": cls.MU_LAW}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown G.711 law {value!r}") from None


@dataclass(frozen=True)
class QuantInterval:
    low: float
    high: float


def _alaw_compress(pcm: np.ndarray) -> np.ndarray:
    lin = pcm.astype(np.int32)
    ix = np.where(lin < 0, (~lin) >> 4, lin >> 4)
    # segment = position of the leading one above bit 4 (0 for ix <= 15)
    seg = np.zeros_like(ix)
    mag = ix.copy()
    for _ in range(7):
        big = mag > 31
        seg += big
        mag = np.where(big, mag >> 1, mag)
    seg = np.where(ix > 15, seg + 1, 0)
    code = np.where(ix > 15, (mag - 16) + (seg << 4), ix)
    code = np.where(lin >= 0, code | 0x80, code)
    return (code ^ 0x55).astype(np.uint8)


def _alaw_expand(code: np.ndarray) -> np.ndarray:
    c = code.astype(np.int32)
    ix = (c ^ 0x55) & 0x7F
    iexp = ix >> 4
    mant = ix & 0x0F
    mant = np.where(iexp > 0, mant + 16, mant)
    mant = (mant << 4) + 8
    mant = np.where(iexp > 1, mant << np.maximum(iexp - 1, 0), mant)
    return np.where(c > 127, mant, -mant).astype(np.int32)


def _ulaw_compress(pcm: np.ndarray) -> np.ndarray:
    lin = pcm.astype(np.int32)
    absno = np.where(lin < 0, ((~lin) >> 2) + 33, (lin >> 2) + 33)
    absno = np.minimum(absno, 0x1FFF)
    i = absno >> 6
    segno = np.ones_like(absno)
    for _ in range(8):
        nz = i != 0
        segno += nz
        i = i >> 1
    high = 8 - segno
    low = 0x0F - ((absno >> segno) & 0x0F)
    code = (high << 4) | low
    code = np.where(lin >= 0, code | 0x80, code)
    return code.astype(np.uint8)


def _ulaw_expand(code: np.ndarray) -> np.ndarray:
    c = code.astype(np.int32)
    sign = np.where(c < 0x80, -1, 1)
    mant = ~c
    exponent = (mant >> 4) & 0x07
    segment = exponent + 1
    mant = mant & 0x0F
    step = 4 << segment
    return (sign * ((0x80 << exponent) + step * mant + step // 2 - 4 * 33)).astype(np.int32)


_ALL_PCM = np.arange(-32768, 32768, dtype=np.int32)


@lru_cache(maxsize=None)
def _tables(law: G711Law) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(encode table over all int16, decoded int16 levels, interval lows, interval highs)."""
    if law is G711Law.A_LAW:
        enc = _alaw_compress(_ALL_PCM)
        dec = _alaw_expand(np.arange(256))
    else:
        enc = _ulaw_compress(_ALL_PCM)
        dec = _ulaw_expand(np.arange(256))
    lo = np.full(256, np.inf)
    hi = np.full(256, -np.inf)
    np.minimum.at(lo, enc, _ALL_PCM)
    np.maximum.at(hi, enc, _ALL_PCM)
    lows = lo / PCM_SCALE
    highs = (hi + 1) / PCM_SCALE
    for arr in (enc, dec, lows, highs):
        arr.flags.writeable = False
    return enc, dec, lows, highs


def float_to_pcm(samples: np.ndarray) -> np.ndarray:
    """Map floats to 16-bit by ``floor(x * 32768)`` with saturation."""
    x = np.asarray(samples, dtype=np.float64)
    return np.clip(np.floor(x * PCM_SCALE), -32768, 32767).astype(np.int32)


def encode_pcm(pcm: np.ndarray, law: G711Law | str) -> np.ndarray:
    """Encode 16-bit integer samples to 8-bit codewords."""
    enc = _tables(G711Law.parse(law))[0]
    return enc[np.asarray(pcm, dtype=np.int32) + 32768]


def decode_pcm(codewords: np.ndarray, law: G711Law | str) -> np.ndarray:
    """Decode codewords to 16-bit integer reconstruction levels."""
    dec = _tables(G711Law.parse(law))[1]
    return dec[np.asarray(codewords, dtype=np.uint8)]


def encode(samples, law: G711Law | str) -> np.ndarray:
    """Encode normalized samples (scalar or array) to uint8 codewords."""
    x = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    return encode_pcm(float_to_pcm(x), law)


def decode(codewords, law: G711Law | str) -> np.ndarray:
    """Decode codewords to normalized reconstruction levels."""
    return decode_pcm(codewords, law) / PCM_SCALE


def quant_interval(codeword: int, law: G711Law | str) -> QuantInterval:
    _, _, lows, highs = _tables(G711Law.parse(law))
    c = int(codeword)
    if not 0 <= c <= 255:
        raise ValueError(f"codeword out of range: {codeword}")
    return QuantInterval(float(lows[c]), float(highs[c]))


def interval_bounds(codewords, law: G711Law | str) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``quant_interval``: arrays of lower and upper boundaries."""
    _, _, lows, highs = _tables(G711Law.parse(law))
    c = np.asarray(codewords, dtype=np.uint8)
    return lows[c], highs[c]


def constrain(
    enhanced: AudioSignal | np.ndarray,
    coded_codewords,
    law: G711Law | str,
) -> AudioSignal | np.ndarray:
    """Clamp each sample into the quantization interval of its codeword.

    Samples outside ``[low, high]`` are replaced by the nearest boundary;
    samples inside are returned untouched. Accepts and returns either an
    AudioSignal or a bare array.
    """
    is_signal = isinstance(enhanced, AudioSignal)
    x = enhanced.samples if is_signal else np.asarray(enhanced, dtype=np.float64)
    codes = np.asarray(coded_codewords)
    if codes.shape != x.shape:
        raise ValueError(
            f"length mismatch: {x.shape[0]} samples vs {codes.shape[0]} codewords"
        )
    lo, hi = interval_bounds(codes, law)
    y = np.minimum(np.maximum(x, lo), hi)
    if is_signal:
        return AudioSignal.saturated(y, enhanced.sample_rate_hz)
    return y


def code_signal(signal: AudioSignal, law: G711Law | str) -> tuple[AudioSignal, np.ndarray]:
    """Encode then decode a signal; returns (decoded signal, codewords)."""
    codes = encode(signal.samples, law)
    return AudioSignal(decode(codes, law), signal.sample_rate_hz), codes
