"""Desk-scale training run on the synthetic corpus, shared by scripts and tests."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import cepstral, corpus, framing, g711, metrics, pipeline, trainer
from .audio_io import AudioSignal
from .cnn import CnnConfig
from .trainer import EpochRecord, TrainResult, TrainSchedule


@dataclass(frozen=True)
class DeskConfig:
    minutes: float = 5.0
    utt_seconds: float = 8.0
    val_utts: int = 6
    test_utts: int = 8
    structure: str = "s3"
    law: str = "alaw"
    max_epochs: int = 100
    seed: int = 0

    @property
    def train_utts(self) -> int:
        return int(round(self.minutes * 60 / self.utt_seconds))


@dataclass
class DeskScores:
    lsd_coded: float
    lsd_enhanced: float
    ssdr_seg_coded: float
    ssdr_seg_enhanced: float
    lsd_envelope_bound: float

    @property
    def lsd_gain(self) -> float:
        return self.lsd_coded - self.lsd_enhanced

    def to_dict(self) -> dict:
        return {**asdict(self), "lsd_gain": self.lsd_gain}


@dataclass
class DeskRun:
    config: DeskConfig
    result: TrainResult
    scores: DeskScores
    train_pairs: int
    train_seconds: float


def corpus_split(cfg: DeskConfig) -> tuple[list[AudioSignal], list[AudioSignal], list[AudioSignal]]:
    """Disjoint train/validation/test utterances (separate generator seeds)."""
    return (corpus.make_utterances(cfg.train_utts, cfg.utt_seconds, seed=1000 + cfg.seed),
            corpus.make_utterances(cfg.val_utts, cfg.utt_seconds, seed=2000 + cfg.seed),
            corpus.make_utterances(cfg.test_utts, cfg.utt_seconds, seed=3000 + cfg.seed))


def code_all(signals: list[AudioSignal], law: str) -> list[AudioSignal]:
    return [g711.code_signal(s, law)[0] for s in signals]


def score(clean: list[AudioSignal], coded: list[AudioSignal], model, structure: str) -> DeskScores:
    """Mean LSD and SSDR_seg over files, enhanced output aligned to the input.

    Also reports the LSD of :func:`clean_envelope_bound`, the floor an
    envelope-only model can reach.
    """
    rows = []
    for c, q in zip(clean, coded):
        e = pipeline.enhance_signal(q, "cepstral", model, structure, align=True)
        bound = clean_envelope_bound(c, q, structure)
        rows.append((metrics.lsd(c, q), metrics.lsd(c, e), metrics.ssdr_seg(c, q), metrics.ssdr_seg(c, e),
                     metrics.lsd(c, bound)))
    return DeskScores(*(float(v) for v in np.mean(rows, axis=0)))


def clean_envelope_bound(clean: AudioSignal, coded: AudioSignal, structure: str = "s3") -> AudioSignal:
    """Coded speech with each frame's envelope cepstrum replaced by the clean one.

    Fine structure and phase stay coded, so this is the best output any
    envelope-only model can produce for the pair (aligned to the input).
    """
    st = framing.get_structure(structure)
    fc, fq = framing.analyze(clean, st), framing.analyze(coded, st)
    p = fq.frames.shape[1]
    cfg = cepstral.CepstralConfig.for_processing_len(p)
    c_clean, _ = cepstral.analyze_frames(fc.frames, cfg)
    c_coded, phase = cepstral.analyze_frames(fq.frames, cfg)
    c_coded[:, :cfg.env_count] = c_clean[:, :cfg.env_count]
    out = cepstral.synthesize_frames(c_coded, phase, cfg)[:, :p]
    return framing.reconstruct(fq.replace(out), align=True)


def run(cfg: DeskConfig = DeskConfig(),
        on_epoch: Callable[[EpochRecord], None] | None = None) -> DeskRun:
    train_clean, val_clean, test_clean = corpus_split(cfg)
    train_set = trainer.prepare_dataset(train_clean, code_all(train_clean, cfg.law), cfg.structure, "cepstral")
    val_set = trainer.prepare_dataset(val_clean, code_all(val_clean, cfg.law), cfg.structure, "cepstral")
    model_cfg = CnnConfig(input_len=train_set.frame_len, seed=cfg.seed)
    t0 = time.perf_counter()
    result = trainer.train(train_set, val_set, model_cfg,
                           TrainSchedule(max_epochs=cfg.max_epochs, seed=cfg.seed), on_epoch=on_epoch)
    seconds = time.perf_counter() - t0
    scores = score(test_clean, code_all(test_clean, cfg.law), result.model, cfg.structure)
    return DeskRun(cfg, result, scores, len(train_set), seconds)
