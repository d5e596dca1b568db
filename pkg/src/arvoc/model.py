"""Model configuration, weight container, quantizer, and cost accountant.

Container format (".frgn", little-endian throughout):

    magic "FRGN" | u32 version=1 | u8 precision (0 float, 1 int8)
    | u8 embedding kind (0 fixed-sinusoidal, 1 learned-table) | u16 reserved
    | 10 x u32 config fields | u32 tensor count
    | directory: per tensor
        u16 name length, name (utf-8), u8 dtype (0 f32, 1 i8), u8 ndim,
        u32 dims..., u64 scales offset, u64 scales bytes,
        u64 payload offset, u64 payload bytes
    | payload region (per-row scales then raw tensor bytes, offsets
      relative to the region start)
    | u32 CRC32 of the payload region

Serialization is canonical: tensors appear in graph order with
sequentially assigned offsets, so save(load(save(m))) is byte-identical.
"""

import struct
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import nn

MAGIC = b"FRGN"
VERSION = 1

_EMBED_KINDS = ("fixed-sinusoidal", "learned-table")


class ContainerError(Exception):
    """Base class for model container failures."""


class BadMagicError(ContainerError):
    pass


class UnsupportedVersionError(ContainerError):
    pass


class TruncatedContainerError(ContainerError):
    pass


class ChecksumError(ContainerError):
    pass


class GraphMismatchError(ContainerError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    cond_hidden: int = 256
    cond_sub_dim: int = 128
    sub_hidden: int = 256
    sub_layers: int = 3
    embedding_kind: str = "fixed-sinusoidal"
    subframe_len: int = 40
    frame_subframes: int = 4
    feature_dim: int = 20
    embed_dim: int = 12
    pitch_min: int = 32
    pitch_max: int = 320

    def __post_init__(self):
        if min(self.cond_hidden, self.cond_sub_dim, self.sub_hidden) < 1:
            raise ValueError("layer dimensions must be positive")
        if self.sub_layers < 1:
            raise ValueError("need at least one hidden subframe layer")
        if self.embedding_kind not in _EMBED_KINDS:
            raise ValueError(f"unknown embedding kind {self.embedding_kind!r}")
        if (self.subframe_len, self.frame_subframes) != (40, 4):
            raise ValueError("subframe geometry is fixed at 4 x 40 samples")
        if self.feature_dim + self.embed_dim != 32:
            raise ValueError("conditioning input must total 32 dimensions")
        if (self.pitch_min, self.pitch_max) != (32, 320):
            raise ValueError("pitch range is fixed at [32, 320] samples")

    @property
    def cond_in(self) -> int:
        return self.feature_dim + self.embed_dim


# Small preset kept as configuration only; its dimensions are not tuned.
SMALL_CONFIG = ModelConfig(cond_hidden=160, cond_sub_dim=96, sub_hidden=160)


@dataclass
class TensorSpec:
    shape: tuple[int, ...]
    quantize: bool  # False: stays float even in int8 models


def tensor_graph(config: ModelConfig) -> dict[str, TensorSpec]:
    """Required tensor names and shapes; a pure function of the config."""
    h, d, s = config.cond_hidden, config.cond_sub_dim, config.sub_hidden
    n = config.subframe_len
    fb = 2 * n  # previous-subframe + pitch-prediction feedback width
    g: dict[str, TensorSpec] = {}
    # The conditioning input layer consumes raw (unbounded) features, so it
    # is exempt from activation-range int8 quantization.
    g["cond.fc.w"] = TensorSpec((h, config.cond_in), quantize=False)
    g["cond.fc.b"] = TensorSpec((h,), quantize=False)
    g["cond.fc.glu.w"] = TensorSpec((h, h), quantize=True)
    g["cond.conv.w"] = TensorSpec((h, h, 3), quantize=True)
    g["cond.conv.b"] = TensorSpec((h,), quantize=False)
    g["cond.conv.glu.w"] = TensorSpec((h, h), quantize=True)
    g["cond.up.w"] = TensorSpec((4 * d, h), quantize=True)
    g["cond.up.b"] = TensorSpec((4 * d,), quantize=False)
    g["cond.up.glu.w"] = TensorSpec((d, d), quantize=True)
    g["sub.gain.w"] = TensorSpec((1, d), quantize=False)
    g["sub.gain.b"] = TensorSpec((1,), quantize=False)
    g["sub.gate.w"] = TensorSpec((n, d), quantize=False)
    g["sub.gate.b"] = TensorSpec((n,), quantize=False)
    for i in range(1, config.sub_layers + 1):
        w_in = (d if i == 1 else s) + fb
        g[f"sub.l{i}.w"] = TensorSpec((s, w_in), quantize=True)
        g[f"sub.l{i}.b"] = TensorSpec((s,), quantize=False)
        g[f"sub.l{i}.glu.w"] = TensorSpec((s, s), quantize=True)
    g["sub.out.w"] = TensorSpec((n, s + fb), quantize=True)
    g["sub.out.b"] = TensorSpec((n,), quantize=False)
    if config.embedding_kind == "learned-table":
        g["embed.table"] = TensorSpec(
            (config.pitch_max - config.pitch_min + 1, config.embed_dim),
            quantize=False)
    return g


@dataclass
class TensorRecord:
    name: str
    data: np.ndarray                  # float32, or int8 when quantized
    scale: np.ndarray | None = None   # per-row float32 scales (int8 only)

    @property
    def dtype(self) -> str:
        return "i8" if self.data.dtype == np.int8 else "f32"


@dataclass
class Model:
    config: ModelConfig
    tensors: dict[str, TensorRecord]
    precision: str = "float"  # "float" | "int8"

    def mat(self, name: str) -> nn.Mat:
        """Weight matrix as an nn.Mat, 3-d tensors flattened per row."""
        rec = self.tensors[name]
        a = rec.data
        a2 = a.reshape(a.shape[0], -1)
        if rec.dtype == "i8":
            return nn.Mat(q=a2, scale=rec.scale)
        return nn.Mat(w=a2)

    def conv_mat(self, name: str) -> nn.Mat:
        """(out, in, 3) conv weights in (out, 3*in) execution layout with
        tap blocks ordered [t-2 | t-1 | t]."""
        rec = self.tensors[name]
        a = rec.data.transpose(0, 2, 1).reshape(rec.data.shape[0], -1)
        if rec.dtype == "i8":
            return nn.Mat(q=np.ascontiguousarray(a), scale=rec.scale)
        return nn.Mat(w=a)

    def vec(self, name: str) -> np.ndarray:
        return self.tensors[name].data


def _validate_graph(config: ModelConfig, tensors: dict[str, TensorRecord],
                    precision: str) -> None:
    graph = tensor_graph(config)
    extra = set(tensors) - set(graph)
    missing = set(graph) - set(tensors)
    if extra or missing:
        raise GraphMismatchError(
            f"tensor set mismatch: missing={sorted(missing)} extra={sorted(extra)}")
    for name, spec in graph.items():
        rec = tensors[name]
        if tuple(rec.data.shape) != spec.shape:
            raise GraphMismatchError(
                f"{name}: shape {rec.data.shape}, expected {spec.shape}")
        want_i8 = precision == "int8" and spec.quantize
        if (rec.dtype == "i8") != want_i8:
            raise GraphMismatchError(f"{name}: dtype {rec.dtype} inconsistent "
                                     f"with {precision} precision")
        if rec.dtype == "i8":
            if rec.scale is None or rec.scale.shape != (rec.data.shape[0],):
                raise GraphMismatchError(f"{name}: bad or missing int8 scales")
        elif rec.scale is not None:
            raise GraphMismatchError(f"{name}: float tensor carries scales")


def random_model(config: ModelConfig = ModelConfig(), seed: int = 0,
                 weight_scale: float = 1.0,
                 feedback_scale: float = 1.0) -> Model:
    """Float model with fan-in-scaled Gaussian weights and zero biases.

    Used for fixtures and benchmarks. feedback_scale < 1 damps the
    subframe stack's feedback input columns, which makes the
    autoregressive dynamics contractive the way a converged model's are;
    untrained full-strength feedback is chaotic and two nearby
    trajectories decohere.
    """
    rng = np.random.default_rng(seed)
    fb = 2 * config.subframe_len
    tensors = {}
    for name, spec in tensor_graph(config).items():
        if len(spec.shape) == 1:
            data = np.zeros(spec.shape, dtype=np.float32)
        else:
            fan_in = int(np.prod(spec.shape[1:]))
            data = rng.normal(0.0, weight_scale / np.sqrt(fan_in),
                              size=spec.shape).astype(np.float32)
            if name.startswith("sub.") and name.endswith(".w") and \
                    "glu" not in name and name not in ("sub.gain.w", "sub.gate.w"):
                data[:, -fb:] *= feedback_scale
        tensors[name] = TensorRecord(name, data)
    return Model(config=config, tensors=tensors, precision="float")


def quantize_weights(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric per-output-row int8 quantization of a weight tensor."""
    rows = w.shape[0]
    flat = np.asarray(w, dtype=np.float32).reshape(rows, -1)
    row_max = np.max(np.abs(flat), axis=1)
    scale = np.where(row_max > 0, row_max / np.float32(127.0), 1.0).astype(np.float32)
    q = np.clip(np.rint(flat / scale[:, None]), -127, 127).astype(np.int8)
    return q.reshape(w.shape), scale


def quantize_model(model: Model) -> Model:
    """Int8 copy of a float model; gain/gate/input-layer weights and all
    biases stay float."""
    if model.precision != "float":
        raise ValueError("quantize_model expects a float model")
    graph = tensor_graph(model.config)
    tensors = {}
    for name, rec in model.tensors.items():
        if graph[name].quantize:
            q, scale = quantize_weights(rec.data)
            tensors[name] = TensorRecord(name, q, scale)
        else:
            tensors[name] = TensorRecord(name, rec.data.copy())
    return Model(config=model.config, tensors=tensors, precision="int8")


def dequantize_model(model: Model) -> Model:
    """Float model with the int8 grid values materialized."""
    tensors = {}
    for name, rec in model.tensors.items():
        if rec.dtype == "i8":
            shape = rec.data.shape
            flat = rec.data.reshape(shape[0], -1).astype(np.float32)
            data = (flat * rec.scale[:, None]).reshape(shape)
            tensors[name] = TensorRecord(name, data)
        else:
            tensors[name] = TensorRecord(name, rec.data.copy())
    return Model(config=model.config, tensors=tensors, precision="float")


_CONFIG_FIELDS = ("cond_hidden", "cond_sub_dim", "sub_hidden", "sub_layers",
                  "subframe_len", "frame_subframes", "feature_dim",
                  "embed_dim", "pitch_min", "pitch_max")


def save_model(model: Model) -> bytes:
    _validate_graph(model.config, model.tensors, model.precision)
    cfg = model.config
    head = bytearray()
    head += MAGIC
    head += struct.pack("<IBBH", VERSION,
                        1 if model.precision == "int8" else 0,
                        _EMBED_KINDS.index(cfg.embedding_kind), 0)
    head += struct.pack("<10I", *(getattr(cfg, f) for f in _CONFIG_FIELDS))
    names = list(tensor_graph(cfg))  # canonical order
    head += struct.pack("<I", len(names))
    directory = bytearray()
    region = bytearray()
    for name in names:
        rec = model.tensors[name]
        scales_off = scales_len = 0
        if rec.scale is not None:
            scales_off = len(region)
            sb = rec.scale.astype("<f4").tobytes()
            scales_len = len(sb)
            region += sb
        payload = rec.data.astype("<i1" if rec.dtype == "i8" else "<f4").tobytes()
        payload_off = len(region)
        region += payload
        nb = name.encode("utf-8")
        directory += struct.pack(f"<H{len(nb)}sBB", len(nb), nb,
                                 1 if rec.dtype == "i8" else 0, rec.data.ndim)
        directory += struct.pack(f"<{rec.data.ndim}I", *rec.data.shape)
        directory += struct.pack("<4Q", scales_off, scales_len,
                                 payload_off, len(payload))
    crc = zlib.crc32(bytes(region))
    return bytes(head + directory + region + struct.pack("<I", crc))


def load_model(data: bytes) -> Model:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError("not a model container (bad magic)")

    pos = 4

    def take(fmt: str):
        nonlocal pos
        size = struct.calcsize(fmt)
        if pos + size > len(data):
            raise TruncatedContainerError(f"container truncated at byte {pos}")
        out = struct.unpack_from(fmt, data, pos)
        pos += size
        return out

    version, prec_code, embed_code, _ = take("<IBBH")
    if version != VERSION:
        raise UnsupportedVersionError(f"container version {version}, expected {VERSION}")
    if prec_code not in (0, 1) or embed_code not in (0, 1):
        raise GraphMismatchError("unknown precision or embedding code")
    cfg_values = take("<10I")
    try:
        config = ModelConfig(embedding_kind=_EMBED_KINDS[embed_code],
                             **dict(zip(_CONFIG_FIELDS, cfg_values)))
    except ValueError as exc:
        raise GraphMismatchError(f"invalid config: {exc}") from exc
    precision = "int8" if prec_code else "float"

    (n_tensors,) = take("<I")
    entries = []
    for _ in range(n_tensors):
        (name_len,) = take("<H")
        (name_b,) = take(f"<{name_len}s")
        dtype_code, ndim = take("<BB")
        shape = take(f"<{ndim}I")
        scales_off, scales_len, payload_off, payload_len = take("<4Q")
        entries.append((name_b.decode("utf-8"), dtype_code, shape,
                        scales_off, scales_len, payload_off, payload_len))

    if len(data) < pos + 4:
        raise TruncatedContainerError("container missing checksum")
    region = data[pos:-4]
    (crc_stored,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(region) != crc_stored:
        raise ChecksumError("payload checksum mismatch")

    tensors = {}
    for name, dtype_code, shape, s_off, s_len, p_off, p_len in entries:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 0
        item = 1 if dtype_code == 1 else 4
        if p_len != count * item or p_off + p_len > len(region):
            raise TruncatedContainerError(f"{name}: payload out of bounds")
        payload = region[p_off:p_off + p_len]
        if dtype_code == 1:
            arr = np.frombuffer(payload, dtype="<i1").reshape(shape).astype(np.int8)
            if s_len != shape[0] * 4 or s_off + s_len > len(region):
                raise TruncatedContainerError(f"{name}: scales out of bounds")
            scale = np.frombuffer(region[s_off:s_off + s_len], dtype="<f4").astype(np.float32)
            tensors[name] = TensorRecord(name, arr, scale)
        else:
            arr = np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float32)
            tensors[name] = TensorRecord(name, arr)

    _validate_graph(config, tensors, precision)
    return Model(config=config, tensors=tensors, precision=precision)


def count_params(config: ModelConfig) -> int:
    """Exact trainable-scalar count implied by the config."""
    return int(sum(np.prod(spec.shape, dtype=np.int64)
                   for spec in tensor_graph(config).values()))


@dataclass
class FlopReport:
    cond_per_sec: float
    subframe_per_sec: float
    elementwise_per_sec: float

    @property
    def total(self) -> float:
        return self.cond_per_sec + self.subframe_per_sec + self.elementwise_per_sec


def count_flops(config: ModelConfig) -> FlopReport:
    """FLOPS per second of synthesized audio; one multiply-add counts as
    two FLOPS. Frame-rate tensors fire 100/s, subframe-rate ones 400/s."""
    frame_rate, sub_rate, sample_rate = 100.0, 400.0, 16000.0
    cond_macs = sub_macs = 0
    for name, spec in tensor_graph(config).items():
        if len(spec.shape) < 2 or name == "embed.table":
            continue  # biases are adds, counted below; lookup is free
        macs = int(np.prod(spec.shape, dtype=np.int64))
        if name.startswith("cond."):
            cond_macs += macs
        else:
            sub_macs += macs

    h, d, s = config.cond_hidden, config.cond_sub_dim, config.sub_hidden
    n, L = config.subframe_len, config.sub_layers
    act = 2.0  # budget per tanh/sigmoid/exp element
    # Frame rate: bias adds, activations, GLU sigmoid+product.
    cond_elem = (h + h + 4 * d)                    # bias adds
    cond_elem += act * (h + h + 4 * d)             # stage activations
    cond_elem += (act + 1) * (h + h + 4 * d)       # GLU sigmoid + Hadamard
    # Subframe rate: dense biases/activations, GLUs, gain/gate, feedback
    # renormalization, pitch gather+gate, output gain application.
    sub_elem = (L * s + n + n + 1)                 # bias adds
    sub_elem += act * (L * s + n) + act * n + act  # tanh stacks, gate, gain
    sub_elem += (act + 1) * (L * s)                # hidden GLUs
    sub_elem += 2 * n + 2 * n + n                  # fb normalize, gate mult
    elementwise = (frame_rate * cond_elem + sub_rate * sub_elem
                   + sample_rate * 3.0)            # de-emphasis + clip guard
    return FlopReport(cond_per_sec=2.0 * cond_macs * frame_rate,
                      subframe_per_sec=2.0 * sub_macs * sub_rate,
                      elementwise_per_sec=elementwise)
