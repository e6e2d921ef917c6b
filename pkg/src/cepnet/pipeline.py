"""End-to-end enhancement of decoded speech and corpus pair generation."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cepstral, cnn, framing, g711, postfilter
from .audio_io import AudioSignal, read_wav, write_wav
from .cnn import CnnModel, ModelError
from .framing import FrameworkStructure
from .g711 import G711Law

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    CNN_TIME = "time"
    CNN_CEPSTRAL = "cepstral"
    BASELINE = "baseline"

    @classmethod
    def parse(cls, value: "str | Mode") -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"cnn_time": "time", "cnn_cepstral": "cepstral", "postfilter": "baseline",
                   "baseline_postfilter": "baseline"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown mode {value!r}") from None


class ConfigError(ModelError):
    """Model and structure/bandwidth do not fit together."""


DEFAULT_STRUCTURE = {Mode.CNN_TIME: "time", Mode.CNN_CEPSTRAL: "s3"}


@dataclass(frozen=True)
class EnhanceJob:
    input_path: Path
    output_path: Path
    mode: Mode = Mode.CNN_CEPSTRAL
    structure: str | None = None
    model_path: Path | None = None
    constrain: bool = False
    law: G711Law = G711Law.A_LAW
    c0_floor: bool = False
    align: bool = False
    postfilter_cfg: postfilter.PostfilterConfig = field(default_factory=postfilter.PostfilterConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "law", G711Law.parse(self.law))
        if self.mode is not Mode.BASELINE and self.model_path is None:
            raise ConfigError(f"mode {self.mode.value} needs a model file")


def expected_input_len(mode: Mode, structure: FrameworkStructure, sample_rate_hz: int) -> int:
    """Model input length a structure implies at this sample rate."""
    _, p, _ = structure.geometry(sample_rate_hz)
    if mode is Mode.CNN_TIME:
        return p
    try:
        return cepstral.CepstralConfig.for_processing_len(p).env_count
    except ValueError as exc:
        raise ConfigError(f"structure {structure.id} has no cepstral form: {exc}") from None


def check_model(model: CnnModel, mode: Mode, structure: FrameworkStructure, sample_rate_hz: int) -> None:
    want = expected_input_len(mode, structure, sample_rate_hz)
    if model.config.input_len != want:
        raise ConfigError(
            f"model input length {model.config.input_len} does not fit structure {structure.id} "
            f"in {mode.value} mode at {sample_rate_hz} Hz (needs {want})")


def process_frames(frames: framing.FrameSequence, model: CnnModel, mode: Mode,
                   use_c0_floor: bool = False) -> framing.FrameSequence:
    """Run the CNN on every frame; cepstral mode replaces only the envelope."""
    f = frames.frames
    if len(f) == 0:
        return frames
    if mode is Mode.CNN_TIME:
        return frames.replace(cnn.forward(model, f))
    cfg = cepstral.CepstralConfig.for_processing_len(f.shape[1])
    ceps, phase = cepstral.analyze_frames(f, cfg)
    env = cnn.forward(model, ceps[:, :cfg.env_count])
    if use_c0_floor:
        env = cepstral.c0_floor(env, cfg)
    ceps[:, :cfg.env_count] = env
    out = cepstral.synthesize_frames(ceps, phase, cfg)[:, :f.shape[1]]
    return frames.replace(out)


def enhance_signal(coded: AudioSignal, mode: Mode | str, model: CnnModel | None = None,
                   structure: FrameworkStructure | str | None = None, constrain: bool = False,
                   law: G711Law | str = G711Law.A_LAW, use_c0_floor: bool = False, align: bool = False,
                   postfilter_cfg: postfilter.PostfilterConfig | None = None,
                   codewords: np.ndarray | None = None) -> AudioSignal:
    """Enhance decoded speech in memory.

    The output is the causal stream (delayed by the structure's latency)
    unless ``align`` is set. With ``constrain`` the result is clamped into
    the quantization intervals of ``codewords`` (default: re-encode the
    input with ``law``) at the matching delay.
    """
    mode = Mode.parse(mode)
    law = G711Law.parse(law)
    if mode is Mode.BASELINE:
        cfg = postfilter_cfg or postfilter.PostfilterConfig(law=law)
        return postfilter.apply(coded, cfg, codewords=codewords, constrain=constrain, align=align)
    if model is None:
        raise ConfigError(f"mode {mode.value} needs a model")
    st = framing.get_structure(structure or DEFAULT_STRUCTURE[mode])
    rate = coded.sample_rate_hz
    check_model(model, mode, st, rate)
    frames = framing.analyze(coded, st)
    out = framing.reconstruct(process_frames(frames, model, mode, use_c0_floor), align=align)
    if not constrain:
        return out
    if rate != 8000:
        raise ValueError("the quantization constraint needs 8 kHz G.711 input")
    codes = g711.encode(coded.samples, law) if codewords is None else np.asarray(codewords, dtype=np.uint8)
    if len(codes) != len(coded):
        raise ValueError("codeword stream length does not match the signal")
    d = 0 if align else st.delay_samples(rate)
    if d:
        idle = g711.encode(0.0, law)
        codes = np.concatenate([np.full(d, idle, dtype=np.uint8), codes[:len(codes) - d]])
    return AudioSignal.saturated(g711.constrain(out.samples, codes, law), rate)


def enhance(job: EnhanceJob) -> AudioSignal:
    """Run a job and write its output WAV."""
    coded = read_wav(job.input_path)
    model = cnn.load(job.model_path) if job.model_path is not None else None
    out = enhance_signal(coded, job.mode, model, job.structure, job.constrain, job.law,
                         job.c0_floor, job.align, job.postfilter_cfg)
    write_wav(out, job.output_path)
    return out


CODEWORD_SUFFIX = ".g711"


def make_pairs(clean_dir: str | Path, out_dir: str | Path, law: G711Law | str = G711Law.A_LAW,
               keep_codewords: bool = False) -> list[Path]:
    """Encode and decode every 8 kHz WAV in ``clean_dir`` into ``out_dir``.

    Files keep their names; with ``keep_codewords`` the raw codeword
    stream is stored next to each one. Other rates are skipped.
    """
    law = G711Law.parse(law)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in sorted(Path(clean_dir).glob("*.wav")):
        sig = read_wav(path)
        if sig.sample_rate_hz != 8000:
            log.warning("skipping %s: %d Hz is not G.711 narrowband", path.name, sig.sample_rate_hz)
            continue
        decoded, codes = g711.code_signal(sig, law)
        target = out_dir / path.name
        write_wav(decoded, target)
        if keep_codewords:
            codes.tofile(target.with_suffix(CODEWORD_SUFFIX))
        written.append(target)
    return written
