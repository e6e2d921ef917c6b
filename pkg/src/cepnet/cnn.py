"""Convolutional encoder-decoder with two skip connections, in plain numpy.

Layout of activations is (batch, length, channels). Kernels are stored as
(out_maps, N, in_maps); a convolution is a "same"-padded correlation with
``(N - 1) // 2`` zeros on the left and the rest on the right.

    conv1 -> conv2 -> pool -> conv3 -> conv4 -> pool -> conv5 -> up
    -> conv6 -> conv7 (+conv4) -> up -> conv8 -> conv9 (+conv2) -> conv10

Skip sums are taken before the receiving layer's activation; conv10 is
linear. Inputs are standardized with ``norm_mean``/``norm_std`` and the
conv10 output is mapped back with the same statistics, so the network
works on unit-scale values while the loss is measured in target units.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

MAGIC = b"CPN1"
FORMAT_VERSION = 1


class ModelError(ValueError):
    """Invalid model contents (shapes, non-finite weights)."""


class ModelFileError(ModelError):
    """A model file that cannot be parsed or fails validation."""


@dataclass(frozen=True)
class CnnConfig:
    input_len: int = 32
    kernel_len: int = 6
    feature_maps: int = 22
    leaky_slope: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.input_len <= 0 or self.input_len % 4:
            raise ModelError(f"input_len must be a positive multiple of 4, got {self.input_len}")
        if self.kernel_len < 1 or self.feature_maps < 1:
            raise ModelError("kernel_len and feature_maps must be >= 1")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ModelError("leaky_slope must lie in (0, 1)")

    @classmethod
    def scaled(cls, input_len: int, **kwargs) -> "CnnConfig":
        """Topology scaled proportionally from the L=32, N=6, F=22 optimum."""
        n = max(1, round(6 * input_len / 32))
        f = max(1, round(22 * input_len / 32))
        return cls(input_len=input_len, kernel_len=n, feature_maps=f, **kwargs)


def layer_shapes(config: CnnConfig) -> list[tuple[int, int, int]]:
    """(out_maps, N, in_maps) for the ten convolution layers."""
    F, N = config.feature_maps, config.kernel_len
    io = [(F, 1), (F, F), (2 * F, F), (2 * F, 2 * F), (F, 2 * F),
          (2 * F, F), (2 * F, 2 * F), (F, 2 * F), (F, F), (1, F)]
    return [(o, N, i) for o, i in io]


def param_count(config: CnnConfig) -> int:
    return sum(o * n * i + o for o, n, i in layer_shapes(config))


def macs_per_frame(config: CnnConfig) -> int:
    """Dominant convolution MACs per frame: 10.5 N L F^2 + 2 N L F."""
    N, L, F = config.kernel_len, config.input_len, config.feature_maps
    return int(round(10.5 * N * L * F * F + 2 * N * L * F))


def mips(config: CnnConfig, frames_per_second: float) -> float:
    return macs_per_frame(config) * frames_per_second / 1e6


@dataclass
class CnnModel:
    config: CnnConfig
    kernels: list[np.ndarray]
    biases: list[np.ndarray]
    norm_mean: np.ndarray
    norm_std: np.ndarray

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        shapes = layer_shapes(self.config)
        if len(self.kernels) != len(shapes) or len(self.biases) != len(shapes):
            raise ModelError(f"expected {len(shapes)} layers")
        for k, (w, b, shp) in enumerate(zip(self.kernels, self.biases, shapes)):
            if w.shape != shp or b.shape != (shp[0],):
                raise ModelError(f"layer {k + 1}: kernel {w.shape}/bias {b.shape}, expected {shp}")
        L = self.config.input_len
        if self.norm_mean.shape != (L,) or self.norm_std.shape != (L,):
            raise ModelError("normalization statistics must have length input_len")
        if np.any(self.norm_std <= 0):
            raise ModelError("norm_std must be positive")
        if not all(np.all(np.isfinite(a)) for a in self.parameters() + [self.norm_mean, self.norm_std]):
            raise ModelError("model contains non-finite values")

    @classmethod
    def init(cls, config: CnnConfig, norm_mean=None, norm_std=None) -> "CnnModel":
        """Glorot-uniform kernels from ``config.seed``, zero biases."""
        rng = np.random.default_rng(config.seed)
        kernels, biases = [], []
        for o, n, i in layer_shapes(config):
            limit = np.sqrt(6.0 / (n * i + n * o))
            w = rng.uniform(-limit, limit, size=(o, n, i))
            kernels.append(w.astype(np.float32).astype(np.float64))
            biases.append(np.zeros(o))
        L = config.input_len
        mean = np.zeros(L) if norm_mean is None else np.asarray(norm_mean, dtype=np.float64)
        std = np.ones(L) if norm_std is None else np.asarray(norm_std, dtype=np.float64)
        return cls(config, kernels, biases, mean.copy(), std.copy())

    def parameters(self) -> list[np.ndarray]:
        return list(self.kernels) + list(self.biases)

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def copy(self) -> "CnnModel":
        return CnnModel(self.config, [w.copy() for w in self.kernels],
                        [b.copy() for b in self.biases],
                        self.norm_mean.copy(), self.norm_std.copy())

    def round_to_float32(self) -> None:
        """Round parameters in place to what the model file can store."""
        for arr in self.parameters() + [self.norm_mean, self.norm_std]:
            arr[...] = arr.astype(np.float32)


def make_identity_model(config: CnnConfig, center: float = 0.0, scale: float = 1.0,
                        offset: float = 50.0) -> CnnModel:
    """A model with ``forward(x) == x`` up to rounding.

    Inputs are normalized by the scalar ``center``/``scale`` and shifted by
    ``offset`` so every activation stays on the identity branch of the
    leaky ReLU; only conv1, conv2 (through the skip into conv9) and conv10
    carry weight. Requires ``|x - center| / scale < offset``.
    """
    L = config.input_len
    model = CnnModel.init(config, np.full(L, float(center)), np.full(L, float(scale)))
    for w, b in zip(model.kernels, model.biases):
        w[...] = 0.0
        b[...] = 0.0
    tap = (config.kernel_len - 1) // 2
    model.kernels[0][0, tap, 0] = 1.0
    model.biases[0][0] = offset
    model.kernels[1][0, tap, 0] = 1.0
    model.kernels[9][0, tap, 0] = 1.0
    model.biases[9][0] = -offset
    return model


# --- layer primitives -------------------------------------------------------

def _pad(x: np.ndarray, n: int) -> np.ndarray:
    left = (n - 1) // 2
    return np.pad(x, ((0, 0), (left, n - 1 - left), (0, 0)))


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Returns (output, im2col patches) for input (B, L, Cin)."""
    o, n, i = w.shape
    B, L, _ = x.shape
    patches = sliding_window_view(_pad(x, n), n, axis=1)  # (B, L, Cin, N)
    patches = patches.transpose(0, 1, 3, 2).reshape(B * L, n * i)
    out = patches @ w.reshape(o, n * i).T + b
    return out.reshape(B, L, o), patches


def conv_backward(dout: np.ndarray, patches: np.ndarray, w: np.ndarray, x_shape) -> tuple:
    """Gradients (dx, dw, db) of a conv layer."""
    o, n, i = w.shape
    B, L, _ = x_shape
    d2 = dout.reshape(B * L, o)
    dw = (d2.T @ patches).reshape(o, n, i)
    db = d2.sum(axis=0)
    dpatch = (d2 @ w.reshape(o, n * i)).reshape(B, L, n, i)
    dxp = np.zeros((B, L + n - 1, i))
    for j in range(n):
        dxp[:, j:j + L, :] += dpatch[:, :, j, :]
    left = (n - 1) // 2
    return dxp[:, left:left + L, :], dw, db


def leaky(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, z, slope * z)


def leaky_grad(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, 1.0, slope)


def maxpool(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Non-overlapping 2x1 max pool; ties go to the earlier sample."""
    B, L, C = x.shape
    pairs = x.reshape(B, L // 2, 2, C)
    second = pairs[:, :, 1, :] > pairs[:, :, 0, :]
    return np.where(second, pairs[:, :, 1, :], pairs[:, :, 0, :]), second


def maxpool_backward(dout: np.ndarray, second: np.ndarray) -> np.ndarray:
    B, M, C = dout.shape
    dx = np.zeros((B, M, 2, C))
    dx[:, :, 0, :] = np.where(second, 0.0, dout)
    dx[:, :, 1, :] = np.where(second, dout, 0.0)
    return dx.reshape(B, 2 * M, C)


def upsample(x: np.ndarray) -> np.ndarray:
    return np.repeat(x, 2, axis=1)


def upsample_backward(dout: np.ndarray) -> np.ndarray:
    B, L, C = dout.shape
    return dout.reshape(B, L // 2, 2, C).sum(axis=2)


# --- network ------------------------------------------------------------------

def _check_input(model: CnnModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.config.input_len:
        raise ValueError(f"input length must be {model.config.input_len}, got shape {x.shape}")
    return x


def _forward(model: CnnModel, x: np.ndarray, keep: bool):
    a = model.config.leaky_slope
    W, b = model.kernels, model.biases
    cache: dict = {}
    h = ((x - model.norm_mean) / model.norm_std)[:, :, None]

    def conv(k, inp, skip=None, act=True):
        z, patches = conv_forward(inp, W[k], b[k])
        if skip is not None:
            z = z + skip
        if keep:
            cache[k] = (inp.shape, patches, z)
        return leaky(z, a) if act else z

    h1 = conv(0, h)
    h2 = conv(1, h1)
    p1, s1 = maxpool(h2)
    h3 = conv(2, p1)
    h4 = conv(3, h3)
    p2, s2 = maxpool(h4)
    h5 = conv(4, p2)
    h6 = conv(5, upsample(h5))
    h7 = conv(6, h6, skip=h4)
    h8 = conv(7, upsample(h7))
    h9 = conv(8, h8, skip=h2)
    y = conv(9, h9, act=False)[:, :, 0] * model.norm_std + model.norm_mean
    if keep:
        cache["pool"] = (s1, s2)
    return y, cache


def forward(model: CnnModel, x: np.ndarray) -> np.ndarray:
    """Run the network on one vector (L,) or a batch (B, L)."""
    xb = _check_input(model, x)
    for p in model.parameters():
        if not np.all(np.isfinite(p)):
            raise ModelError("model contains non-finite weights")
    y, _ = _forward(model, xb, keep=False)
    return y[0] if np.ndim(x) == 1 else y


def loss_and_grads(model: CnnModel, x: np.ndarray, target: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean over the batch of per-frame MSE, and its exact gradients.

    Gradients are ordered like :meth:`CnnModel.parameters` (kernels, then
    biases).
    """
    xb = _check_input(model, x)
    tb = np.asarray(target, dtype=np.float64).reshape(xb.shape)
    y, cache = _forward(model, xb, keep=True)
    B, L = xb.shape
    err = y - tb
    loss = float(np.mean(err * err))
    a = model.config.leaky_slope
    W = model.kernels
    dW = [None] * 10
    dB = [None] * 10

    def back(k, dout, act=True):
        shape, patches, z = cache[k]
        dz = dout * leaky_grad(z, a) if act else dout
        dx, dW[k], dB[k] = conv_backward(dz, patches, W[k], shape)
        return dx, dz

    s1, s2 = cache["pool"]
    dy = ((2.0 / (B * L)) * err * model.norm_std)[:, :, None]
    dh9, _ = back(9, dy, act=False)
    dh8, dz9 = back(8, dh9)
    dh7 = upsample_backward(back(7, dh8)[0])
    dh6, dz7 = back(6, dh7)
    dh5 = upsample_backward(back(5, dh6)[0])
    dp2, _ = back(4, dh5)
    dh4 = maxpool_backward(dp2, s2) + dz7
    dh3, _ = back(3, dh4)
    dp1, _ = back(2, dh3)
    dh2 = maxpool_backward(dp1, s1) + dz9
    dh1, _ = back(1, dh2)
    back(0, dh1)
    return loss, dW + dB


def backward(model: CnnModel, x: np.ndarray, target: np.ndarray) -> tuple[list[np.ndarray], float]:
    """Single-frame convenience wrapper: (gradients, loss)."""
    loss, grads = loss_and_grads(model, np.asarray(x)[None, :], np.asarray(target)[None, :])
    return grads, loss


# --- Adam --------------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_model(cls, model: CnnModel, **kwargs) -> "AdamState":
        params = model.parameters()
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kwargs)


def adam_step(state: AdamState, model: CnnModel, grads: list[np.ndarray]) -> None:
    """One bias-corrected Adam update of ``model`` in place."""
    params = model.parameters()
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if len(grads) != len(params):
        raise ValueError("gradient list does not match model parameters")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


# --- serialization -------------------------------------------------------------

def _arrays_in_order(model: CnnModel) -> list[tuple[str, np.ndarray]]:
    named = [(f"kernel{k + 1}", w) for k, w in enumerate(model.kernels)]
    named += [(f"bias{k + 1}", b) for k, b in enumerate(model.biases)]
    named += [("norm_mean", model.norm_mean), ("norm_std", model.norm_std)]
    return named


def save(model: CnnModel, path: str | Path) -> None:
    """Write ``CPN1`` + u32 header length + JSON header + float32 arrays."""
    arrays = []
    offset = 0
    for name, arr in _arrays_in_order(model):
        arrays.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size * 4
    header = {
        "version": FORMAT_VERSION,
        "config": asdict(model.config),
        "dtype": "float32-le",
        "arrays": arrays,
        "data_bytes": offset,
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(hbytes)))
        fh.write(hbytes)
        for _, arr in _arrays_in_order(model):
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load(path: str | Path) -> CnnModel:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ModelFileError(f"{path}: cannot read model file ({exc.strerror})") from exc
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise ModelFileError(f"{path}: not a model file (bad magic)")
    (hlen,) = struct.unpack("<I", raw[4:8])
    if 8 + hlen > len(raw):
        raise ModelFileError(f"{path}: truncated header")
    try:
        header = json.loads(raw[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"{path}: corrupt header") from exc
    if header.get("version") != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported version {header.get('version')}")
    try:
        config = CnnConfig(**header["config"])
    except (TypeError, ModelError) as exc:
        raise ModelFileError(f"{path}: invalid config: {exc}") from exc
    data = raw[8 + hlen:]
    if len(data) != header.get("data_bytes"):
        raise ModelFileError(f"{path}: expected {header.get('data_bytes')} data bytes, found {len(data)}")
    expected = [(f"kernel{k + 1}", s) for k, s in enumerate(layer_shapes(config))]
    expected += [(f"bias{k + 1}", (s[0],)) for k, s in enumerate(layer_shapes(config))]
    expected += [("norm_mean", (config.input_len,)), ("norm_std", (config.input_len,))]
    entries = header["arrays"]
    if [(e["name"], tuple(e["shape"])) for e in entries] != expected:
        raise ModelFileError(f"{path}: array layout inconsistent with config")
    arrays = []
    for e in entries:
        n = int(np.prod(e["shape"]))
        start = e["offset"]
        chunk = data[start:start + 4 * n]
        if len(chunk) != 4 * n:
            raise ModelFileError(f"{path}: truncated array {e['name']}")
        arrays.append(np.frombuffer(chunk, dtype="<f4").astype(np.float64).reshape(e["shape"]))
    try:
        return CnnModel(config, arrays[:10], arrays[10:20], arrays[20], arrays[21])
    except ModelError as exc:
        raise ModelFileError(f"{path}: {exc}") from exc
