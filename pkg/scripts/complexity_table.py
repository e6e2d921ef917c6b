"""Print model size and MIPS for the time-domain model and every cepstral structure.

Usage: python3 scripts/complexity_table.py [--rate 8000]
"""

from __future__ import annotations

import argparse

from cepnet import cnn, framing, pipeline
from cepnet.cnn import CnnConfig
from cepnet.pipeline import ConfigError, Mode


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rate", type=int, default=8000)
    args = ap.parse_args()
    print(f"{'structure':<10}{'domain':<10}{'L':>5}{'N':>4}{'F':>4}{'params':>10}{'frames/s':>10}{'MIPS':>9}")
    for sid in sorted(framing.STRUCTURES):
        st = framing.get_structure(sid)
        mode = Mode.CNN_TIME if sid == "time" else Mode.CNN_CEPSTRAL
        try:
            L = pipeline.expected_input_len(mode, st, args.rate)
        except ConfigError:
            continue
        cfg = CnnConfig.scaled(L)
        fps = 1000.0 / st.shift_ms
        print(f"{sid:<10}{mode.value:<10}{L:>5}{cfg.kernel_len:>4}{cfg.feature_maps:>4}"
              f"{cnn.param_count(cfg):>10,}{fps:>10.1f}{float(f'{cnn.mips(cfg, fps):.3g}'):>9g}")


if __name__ == "__main__":
    main()
