"""Receiver-side enhancement of G.711-coded speech.

Two postprocessors share one framing layer: a convolutional
encoder-decoder applied to raw time frames or to envelope cepstra, and
the classical Wiener postfilter driven by the codec's quantization-noise
model. ``metrics`` scores either against the uncoded reference.
"""

from .audio_io import AudioSignal, read_wav, write_wav
from .cnn import CnnConfig, CnnModel
from .framing import FrameworkStructure, get_structure
from .g711 import G711Law
from .pipeline import EnhanceJob, Mode, enhance, enhance_signal
from .postfilter import PostfilterConfig

__all__ = [
    "AudioSignal", "read_wav", "write_wav",
    "CnnConfig", "CnnModel",
    "FrameworkStructure", "get_structure",
    "G711Law",
    "EnhanceJob", "Mode", "enhance", "enhance_signal",
    "PostfilterConfig",
]
