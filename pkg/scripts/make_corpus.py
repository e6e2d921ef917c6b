"""Write a synthetic clean corpus and its G.711-coded counterpart.

Usage: python3 scripts/make_corpus.py OUT_DIR [--minutes 5] [--utt-seconds 8] [--seed 0] [--law alaw]
Creates OUT_DIR/clean/*.wav and OUT_DIR/coded/*.wav, ready for ``cepnet train``.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from cepnet import corpus, pipeline


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--minutes", type=float, default=5.0)
    ap.add_argument("--utt-seconds", type=float, default=8.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--law", default="alaw")
    ap.add_argument("--keep-codewords", action="store_true")
    args = ap.parse_args()
    n = max(2, int(round(args.minutes * 60 / args.utt_seconds)))
    corpus.write_corpus(args.out_dir / "clean", n, args.utt_seconds, args.seed)
    coded = pipeline.make_pairs(args.out_dir / "clean", args.out_dir / "coded", args.law, args.keep_codewords)
    print(f"{n} utterances of {args.utt_seconds:g} s in {args.out_dir}/clean, {len(coded)} coded")


if __name__ == "__main__":
    main()
