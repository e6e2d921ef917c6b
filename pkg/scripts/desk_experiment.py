"""Train a cepstral-domain model on a synthetic A-law corpus and score it.

Usage: python3 scripts/desk_experiment.py [--minutes 5] [--max-epochs 100] [--out runs/desk]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from cepnet import cnn, experiment, trainer


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--minutes", type=float, default=5.0)
    ap.add_argument("--utt-seconds", type=float, default=8.0)
    ap.add_argument("--max-epochs", type=int, default=100)
    ap.add_argument("--structure", default="s3")
    ap.add_argument("--law", default="alaw")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/desk"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    cfg = experiment.DeskConfig(minutes=args.minutes, utt_seconds=args.utt_seconds, structure=args.structure,
                                law=args.law, max_epochs=args.max_epochs, seed=args.seed)
    run = experiment.run(cfg, on_epoch=lambda r: print(f"epoch {r.epoch:3d} train {r.train_mse:.5g} "
                                                       f"val {r.val_mse:.5g} lr {r.lr:.3g}", flush=True))
    cnn.save(run.result.model, args.out / "model.cpn")
    trainer.write_log(run.result.log, args.out / "train_log.csv")
    summary = {"train_pairs": run.train_pairs, "best_epoch": run.result.best_epoch,
               "epochs": len(run.result.log), "train_seconds": run.train_seconds, **run.scores.to_dict()}
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
