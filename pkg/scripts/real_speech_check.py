"""Score G.711 coding, the baseline postfilter and the clean-envelope bound on WAV files.

Each file is resampled to 8 kHz, leveled to -26 dBFS and A-law coded.
Usage: python3 scripts/real_speech_check.py speech1.wav [speech2.wav ...]
"""

from __future__ import annotations

import argparse
import json
from fractions import Fraction

import numpy as np
import scipy.signal as sps

from cepnet import corpus, experiment, g711, metrics, postfilter
from cepnet.audio_io import AudioSignal, read_wav


def narrowband(path: str) -> AudioSignal:
    sig = read_wav(path)
    ratio = Fraction(8000, sig.sample_rate_hz)
    x = sps.resample_poly(sig.samples, ratio.numerator, ratio.denominator)
    return AudioSignal.saturated(corpus.level_rms(x), 8000)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("wavs", nargs="+")
    ap.add_argument("--law", default="alaw")
    args = ap.parse_args()
    rows = {}
    for path in args.wavs:
        clean = narrowband(path)
        coded = g711.code_signal(clean, args.law)[0]
        outputs = {
            "coded": coded,
            "postfilter": postfilter.apply(coded, postfilter.PostfilterConfig(law=args.law), align=True),
            "clean_envelope": experiment.clean_envelope_bound(clean, coded),
        }
        rows[path] = {k: {"lsd": metrics.lsd(clean, v), "ssdr_seg": metrics.ssdr_seg(clean, v)}
                      for k, v in outputs.items()}
    mean = {k: {m: float(np.mean([r[k][m] for r in rows.values()])) for m in ("lsd", "ssdr_seg")}
            for k in ("coded", "postfilter", "clean_envelope")}
    print(json.dumps({"files": rows, "mean": mean}, indent=2))


if __name__ == "__main__":
    main()
