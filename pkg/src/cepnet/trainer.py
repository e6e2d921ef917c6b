"""Paired-frame datasets and the CNN training loop.

Pairs come from time-aligned clean/coded files: frames whose clean
window is active (frame mean square over file mean square above the VAD
threshold) give one (coded, clean) pair, either as raw time frames or as
envelope cepstra. Training is minibatch Adam with plateau-driven
learning-rate halving, early stopping and best-validation checkpointing.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import cepstral, cnn, framing
from .audio_io import AudioSignal, read_wav
from .cnn import CnnConfig, CnnModel
from .framing import FrameworkStructure
from .metrics import activity


class Domain(enum.Enum):
    TIME = "time"
    CEPSTRAL = "cepstral"

    @classmethod
    def parse(cls, value: "str | Domain") -> "Domain":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown domain {value!r} (use 'time' or 'cepstral')") from None


class EmptyDatasetError(ValueError):
    """No active-speech frame survived the VAD."""


class TrainingDivergedError(RuntimeError):
    """The loss became non-finite."""


@dataclass(frozen=True)
class DatasetConfig:
    vad_threshold: float = 0.1


@dataclass(frozen=True)
class Dataset:
    input_frames: np.ndarray
    target_frames: np.ndarray
    domain: Domain
    structure_id: str
    norm_mean: np.ndarray
    norm_std: np.ndarray

    def __post_init__(self) -> None:
        if self.input_frames.shape != self.target_frames.shape or self.input_frames.ndim != 2:
            raise ValueError("input and target frames must be equally shaped 2-D arrays")
        if np.any(self.norm_std <= 0):
            raise ValueError("norm_std must be positive")

    def __len__(self) -> int:
        return self.input_frames.shape[0]

    @property
    def frame_len(self) -> int:
        return self.input_frames.shape[1]

    @classmethod
    def from_arrays(cls, inputs: np.ndarray, targets: np.ndarray, domain: Domain | str = Domain.TIME,
                    structure_id: str = "time") -> "Dataset":
        x = np.asarray(inputs, dtype=np.float64)
        t = np.asarray(targets, dtype=np.float64)
        if len(x) == 0:
            raise EmptyDatasetError("dataset has no frames")
        mean, std = normalization_stats(x)
        return cls(x, t, Domain.parse(domain), structure_id, mean, std)

    def subset(self, index: np.ndarray) -> "Dataset":
        """Rows ``index``; keeps this dataset's normalization statistics."""
        return replace(self, input_frames=self.input_frames[index], target_frames=self.target_frames[index])


def normalization_stats(inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-position mean and standard deviation; a zero deviation becomes 1."""
    mean = inputs.mean(axis=0)
    std = inputs.std(axis=0)
    return mean, np.where(std > 0, std, 1.0)


def frame_features(signal: AudioSignal, structure: FrameworkStructure | str, domain: Domain | str) -> np.ndarray:
    """Network inputs for every frame: windowed time frames or envelope cepstra."""
    structure = framing.get_structure(structure)
    frames = framing.analyze(signal, structure).frames
    if Domain.parse(domain) is Domain.TIME:
        return frames
    cfg = cepstral.CepstralConfig.for_processing_len(frames.shape[1])
    ceps, _ = cepstral.analyze_frames(frames, cfg)
    return ceps[:, :cfg.env_count]


def active_frames(clean: AudioSignal, structure: FrameworkStructure | str,
                  vad_threshold: float = 0.1) -> np.ndarray:
    """VAD decision for every structure frame, judged on its clean window."""
    structure = framing.get_structure(structure)
    x = clean.samples
    if len(x) == 0:
        return np.zeros(0, dtype=bool)
    segs = framing.window_segments(x, structure, clean.sample_rate_hz)
    return activity(segs, float(np.mean(x * x)), vad_threshold)


def _as_signal(item: AudioSignal | str | Path) -> AudioSignal:
    return item if isinstance(item, AudioSignal) else read_wav(item)


def prepare_dataset(clean: Sequence[AudioSignal | str | Path], coded: Sequence[AudioSignal | str | Path],
                    structure: FrameworkStructure | str, domain: Domain | str,
                    cfg: DatasetConfig = DatasetConfig()) -> Dataset:
    """(coded, clean) pairs from the active frames of every file pair."""
    if len(clean) != len(coded):
        raise ValueError(f"{len(clean)} clean files but {len(coded)} coded files")
    structure = framing.get_structure(structure)
    domain = Domain.parse(domain)
    inputs, targets = [], []
    for c_item, q_item in zip(clean, coded):
        c_sig, q_sig = _as_signal(c_item), _as_signal(q_item)
        if len(c_sig) != len(q_sig) or c_sig.sample_rate_hz != q_sig.sample_rate_hz:
            raise ValueError(f"clean/coded pair is misaligned: {len(c_sig)} vs {len(q_sig)} samples")
        keep = active_frames(c_sig, structure, cfg.vad_threshold)
        if not keep.any():
            continue
        inputs.append(frame_features(q_sig, structure, domain)[keep])
        targets.append(frame_features(c_sig, structure, domain)[keep])
    if not inputs:
        raise EmptyDatasetError("no active speech frames in the given files")
    x, t = np.concatenate(inputs), np.concatenate(targets)
    mean, std = normalization_stats(x)
    return Dataset(x, t, domain, structure.id, mean, std)


# --- schedule ------------------------------------------------------------------

@dataclass(frozen=True)
class TrainSchedule:
    lr: float = 5e-4
    minibatch: int = 16
    halve_patience: int = 2
    stop_patience: int = 16
    max_epochs: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0 or min(self.minibatch, self.halve_patience, self.stop_patience, self.max_epochs) < 1:
            raise ValueError("schedule values must be positive")


@dataclass
class PlateauSchedule:
    """Tracks the best validation MSE; "no decrease" is strict (ties stagnate)."""

    halve_patience: int
    stop_patience: int
    best: float = np.inf
    since_best: int = 0
    since_halving: int = 0

    def update(self, val_mse: float) -> tuple[bool, bool, bool]:
        """Feed one epoch's validation MSE; returns (improved, halve_lr, stop)."""
        if val_mse < self.best:
            self.best = val_mse
            self.since_best = self.since_halving = 0
            return True, False, False
        self.since_best += 1
        self.since_halving += 1
        halve = self.since_halving >= self.halve_patience
        if halve:
            self.since_halving = 0
        return False, halve, self.since_best >= self.stop_patience


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_mse: float
    val_mse: float
    lr: float


@dataclass
class TrainResult:
    model: CnnModel
    log: list[EpochRecord] = field(default_factory=list)
    num_updates: int = 0
    best_epoch: int = 0


def mse(model: CnnModel, data: Dataset, chunk: int = 4096) -> float:
    """Mean over frames of the per-frame MSE, in target units."""
    total = 0.0
    for s in range(0, len(data), chunk):
        y = cnn.forward(model, data.input_frames[s:s + chunk])
        total += float(np.sum((y - data.target_frames[s:s + chunk]) ** 2))
    return total / data.input_frames.size


def train(dataset: Dataset, val_dataset: Dataset, config: CnnConfig,
          sched: TrainSchedule = TrainSchedule(),
          evaluator: Callable[[CnnModel], float] | None = None,
          on_epoch: Callable[[EpochRecord], None] | None = None) -> TrainResult:
    """Train from a fresh ``config.seed`` initialization; returns the best checkpoint.

    ``evaluator`` replaces the validation MSE (used to drive the schedule
    in tests); ``on_epoch`` sees every log record as it is produced.
    """
    if len(dataset) < sched.minibatch:
        raise ValueError(f"dataset has {len(dataset)} frames, fewer than one minibatch")
    if len(val_dataset) == 0:
        raise EmptyDatasetError("validation set is empty")
    if dataset.frame_len != config.input_len or val_dataset.frame_len != config.input_len:
        raise ValueError(f"frame length {dataset.frame_len} does not match model input {config.input_len}")
    evaluate = evaluator or (lambda m: mse(m, val_dataset))

    model = CnnModel.init(config, dataset.norm_mean, dataset.norm_std)
    model.round_to_float32()
    adam = cnn.AdamState.for_model(model, lr=sched.lr)
    plateau = PlateauSchedule(sched.halve_patience, sched.stop_patience)
    rng = np.random.default_rng(sched.seed)
    result = TrainResult(model.copy())
    n_batches = len(dataset) // sched.minibatch

    for epoch in range(1, sched.max_epochs + 1):
        lr_used = adam.lr
        order = rng.permutation(len(dataset))[:n_batches * sched.minibatch]
        losses = np.empty(n_batches)
        for b, idx in enumerate(order.reshape(n_batches, sched.minibatch)):
            loss, grads = cnn.loss_and_grads(model, dataset.input_frames[idx], dataset.target_frames[idx])
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise TrainingDivergedError(f"non-finite loss at epoch {epoch}, minibatch {b + 1} (lr {adam.lr:g})")
            cnn.adam_step(adam, model, grads)
            losses[b] = loss
        result.num_updates += n_batches
        model.round_to_float32()
        val = float(evaluate(model))
        if not np.isfinite(val):
            raise TrainingDivergedError(f"non-finite validation MSE at epoch {epoch}")
        record = EpochRecord(epoch, float(losses.mean()), val, lr_used)
        result.log.append(record)
        if on_epoch is not None:
            on_epoch(record)
        improved, halve, stop = plateau.update(val)
        if improved:
            result.model = model.copy()
            result.best_epoch = epoch
        if halve:
            adam.lr /= 2.0
        if stop:
            break
    return result


def write_log(log: Sequence[EpochRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_mse", "val_mse", "lr"])
        for r in log:
            w.writerow([r.epoch, repr(r.train_mse), repr(r.val_mse), repr(r.lr)])


def read_log(path: str | Path) -> list[EpochRecord]:
    with open(path, newline="") as fh:
        return [EpochRecord(int(r["epoch"]), float(r["train_mse"]), float(r["val_mse"]), float(r["lr"]))
                for r in csv.DictReader(fh)]
