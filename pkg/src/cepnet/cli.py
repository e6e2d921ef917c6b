"""Command-line interface: ``cepnet <command> ...``.

Exit codes: 0 ok, 2 usage error, 3 data error, 4 model error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import cnn, framing, g711, metrics, pipeline, postfilter, trainer
from .audio_io import AudioSignal, read_wav, write_wav

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 2, 3, 4

log = logging.getLogger("cepnet")


def _law(p: argparse.ArgumentParser) -> None:
    p.add_argument("--law", default="alaw", choices=["alaw", "ulaw"])


def cmd_enhance(a: argparse.Namespace) -> int:
    job = pipeline.EnhanceJob(a.input, a.output, a.mode, a.structure, a.model, a.constrain,
                              a.law, a.c0_floor, a.align)
    pipeline.enhance(job)
    return EXIT_OK


def _paired_files(clean_dir: Path, coded_dir: Path) -> tuple[list[Path], list[Path]]:
    clean = sorted(clean_dir.glob("*.wav"))
    missing = [p.name for p in clean if not (coded_dir / p.name).exists()]
    if missing:
        raise FileNotFoundError(f"no coded counterpart for {', '.join(missing[:5])}")
    if len(clean) < 2:
        raise ValueError("need at least two file pairs (training and validation)")
    return clean, [coded_dir / p.name for p in clean]


def cmd_train(a: argparse.Namespace) -> int:
    clean, coded = _paired_files(a.clean_dir, a.coded_dir)
    n_val = max(1, int(math.ceil(a.val_fraction * len(clean))))
    if n_val >= len(clean):
        raise ValueError("validation split leaves no training files")
    train_set = trainer.prepare_dataset(clean[:-n_val], coded[:-n_val], a.structure, a.domain)
    val_set = trainer.prepare_dataset(clean[-n_val:], coded[-n_val:], a.structure, a.domain)
    config = cnn.CnnConfig.scaled(train_set.frame_len, seed=a.seed)
    sched = trainer.TrainSchedule(lr=a.lr, max_epochs=a.max_epochs, seed=a.seed)
    log.info("training on %d pairs, validating on %d", len(train_set), len(val_set))
    result = trainer.train(train_set, val_set, config, sched,
                           on_epoch=lambda r: log.info("epoch %d train %.6g val %.6g lr %.3g",
                                                       r.epoch, r.train_mse, r.val_mse, r.lr))
    cnn.save(result.model, a.out)
    trainer.write_log(result.log, a.log or a.out.with_suffix(".csv"))
    return EXIT_OK


def cmd_eval(a: argparse.Namespace) -> int:
    ref, proc = read_wav(a.reference), read_wav(a.processed)
    d = int(round(a.delay_ms * proc.sample_rate_hz / 1000))
    if d:
        shifted = np.concatenate([proc.samples[d:], np.zeros(d)])
        proc = AudioSignal(shifted, proc.sample_rate_hz)
    cfg = metrics.MetricsConfig(vad_threshold=a.vad_threshold)
    print(json.dumps(metrics.evaluate(ref, proc, cfg).to_dict(), indent=2))
    return EXIT_OK


def cmd_g711_encode(a: argparse.Namespace) -> int:
    sig = read_wav(a.input)
    if sig.sample_rate_hz != 8000:
        raise ValueError("G.711 needs 8 kHz input")
    g711.encode(sig.samples, a.law).tofile(a.output)
    return EXIT_OK


def cmd_g711_decode(a: argparse.Namespace) -> int:
    codes = np.fromfile(a.input, dtype=np.uint8)
    write_wav(AudioSignal(g711.decode(codes, a.law), 8000), a.output)
    return EXIT_OK


def cmd_postfilter(a: argparse.Namespace) -> int:
    cfg = postfilter.PostfilterConfig(beta=a.beta, gmin_db=a.gmin_db, law=a.law, lookahead=a.lookahead)
    out = postfilter.apply(read_wav(a.input), cfg, constrain=a.constrain, align=a.align)
    write_wav(out, a.output)
    return EXIT_OK


def cmd_make_pairs(a: argparse.Namespace) -> int:
    written = pipeline.make_pairs(a.clean_dir, a.out_dir, a.law, a.keep_codewords)
    print(f"wrote {len(written)} files to {a.out_dir}")
    return EXIT_OK


def cmd_info(a: argparse.Namespace) -> int:
    model = cnn.load(a.model)
    cfg = model.config
    info = {
        "config": {"input_len": cfg.input_len, "kernel_len": cfg.kernel_len,
                   "feature_maps": cfg.feature_maps, "leaky_slope": cfg.leaky_slope, "seed": cfg.seed},
        "param_count": cnn.param_count(cfg),
        "macs_per_frame": cnn.macs_per_frame(cfg),
    }
    print(json.dumps(info, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cepnet", description="Postprocessing of G.711-coded speech.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance a decoded WAV")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--mode", default="cepstral", choices=["time", "cepstral", "baseline"])
    p.add_argument("--model", type=Path)
    p.add_argument("--structure", choices=sorted(framing.STRUCTURES))
    p.add_argument("--constrain", action="store_true")
    p.add_argument("--c0-floor", action="store_true")
    p.add_argument("--align", action="store_true", help="remove the structure's delay")
    _law(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("train", help="train a CNN on clean/coded WAV pairs")
    p.add_argument("--clean-dir", type=Path, required=True)
    p.add_argument("--coded-dir", type=Path, required=True)
    p.add_argument("--structure", default="s3", choices=sorted(framing.STRUCTURES))
    p.add_argument("--domain", default="cepstral", choices=["time", "cepstral"])
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--log", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="LSD and SSDR of a processed file against its reference")
    p.add_argument("reference", type=Path)
    p.add_argument("processed", type=Path)
    p.add_argument("--delay-ms", type=float, default=0.0, help="processing delay to compensate")
    p.add_argument("--vad-threshold", type=float, default=0.1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("g711-encode", help="WAV to raw codeword bytes")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    _law(p)
    p.set_defaults(func=cmd_g711_encode)

    p = sub.add_parser("g711-decode", help="raw codeword bytes to WAV")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    _law(p)
    p.set_defaults(func=cmd_g711_decode)

    p = sub.add_parser("postfilter", help="baseline Wiener postfilter")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--beta", type=float, default=0.98)
    p.add_argument("--gmin-db", type=float, default=-10.0)
    p.add_argument("--lookahead", type=int, default=0, help="analysis lookahead in samples (adds delay)")
    p.add_argument("--constrain", action="store_true")
    p.add_argument("--align", action="store_true")
    _law(p)
    p.set_defaults(func=cmd_postfilter)

    p = sub.add_parser("make-pairs", help="G.711-code every WAV of a directory")
    p.add_argument("clean_dir", type=Path)
    p.add_argument("out_dir", type=Path)
    p.add_argument("--keep-codewords", action="store_true")
    _law(p)
    p.set_defaults(func=cmd_make_pairs)

    p = sub.add_parser("info", help="model configuration and complexity")
    p.add_argument("model", type=Path)
    p.set_defaults(func=cmd_info)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except cnn.ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (ValueError, OSError, EOFError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
