"""Writers for the engine's external file formats.

Implements the documented ".frgn" model container (float precision; the
engine's own quantizer handles int8) and the headerless ".ffe" feature
format, independently of the engine package. The tensor name set is a
pure function of the configuration and must match the engine's graph
exactly or the engine will refuse the container.
"""

import struct
import zlib

import numpy as np

from .config import GenConfig

MAGIC = b"FRGN"
VERSION = 1

_CONFIG_FIELDS = ("cond_hidden", "cond_sub_dim", "sub_hidden", "sub_layers",
                  "subframe_len", "frame_subframes", "feature_dim",
                  "embed_dim", "pitch_min", "pitch_max")


def tensor_shapes(config: GenConfig) -> dict[str, tuple[int, ...]]:
    """Canonical tensor order and shapes for one generator."""
    h, d, s = config.cond_hidden, config.cond_sub_dim, config.sub_hidden
    n = config.subframe_len
    fb = 2 * n
    g = {
        "cond.fc.w": (h, 32), "cond.fc.b": (h,),
        "cond.fc.glu.w": (h, h),
        "cond.conv.w": (h, h, 3), "cond.conv.b": (h,),
        "cond.conv.glu.w": (h, h),
        "cond.up.w": (4 * d, h), "cond.up.b": (4 * d,),
        "cond.up.glu.w": (d, d),
        "sub.gain.w": (1, d), "sub.gain.b": (1,),
        "sub.gate.w": (n, d), "sub.gate.b": (n,),
    }
    for i in range(1, config.sub_layers + 1):
        w_in = (d if i == 1 else s) + fb
        g[f"sub.l{i}.w"] = (s, w_in)
        g[f"sub.l{i}.b"] = (s,)
        g[f"sub.l{i}.glu.w"] = (s, s)
    g["sub.out.w"] = (n, s + fb)
    g["sub.out.b"] = (n,)
    if config.embedding_kind == "learned-table":
        g["embed.table"] = (config.pitch_max - config.pitch_min + 1,
                            config.embed_dim)
    return g


def save_frgn(config: GenConfig, tensors: dict[str, np.ndarray]) -> bytes:
    """Float-precision container from a name -> array mapping."""
    shapes = tensor_shapes(config)
    if set(tensors) != set(shapes):
        missing = set(shapes) - set(tensors)
        extra = set(tensors) - set(shapes)
        raise ValueError(f"tensor set mismatch: missing={sorted(missing)} "
                         f"extra={sorted(extra)}")
    head = bytearray()
    head += MAGIC
    embed_code = 1 if config.embedding_kind == "learned-table" else 0
    head += struct.pack("<IBBH", VERSION, 0, embed_code, 0)
    head += struct.pack("<10I", *(getattr(config, f) for f in _CONFIG_FIELDS))
    head += struct.pack("<I", len(shapes))
    directory = bytearray()
    region = bytearray()
    for name, shape in shapes.items():
        arr = np.ascontiguousarray(tensors[name], dtype=np.float32)
        if arr.shape != shape:
            raise ValueError(f"{name}: shape {arr.shape}, expected {shape}")
        payload = arr.astype("<f4").tobytes()
        nb = name.encode("utf-8")
        directory += struct.pack(f"<H{len(nb)}sBB", len(nb), nb, 0, arr.ndim)
        directory += struct.pack(f"<{arr.ndim}I", *arr.shape)
        directory += struct.pack("<4Q", 0, 0, len(region), len(payload))
        region += payload
    crc = zlib.crc32(bytes(region))
    return bytes(head + directory + region + struct.pack("<I", crc))


def read_frgn_float(data: bytes) -> tuple[GenConfig, dict[str, np.ndarray]]:
    """Minimal reader for float containers (round-trip self-checks)."""
    if data[:4] != MAGIC:
        raise ValueError("bad magic")
    version, prec, embed_code, _ = struct.unpack_from("<IBBH", data, 4)
    if version != VERSION or prec != 0:
        raise ValueError("unsupported container")
    cfg_values = struct.unpack_from("<10I", data, 12)
    config = GenConfig(embedding_kind="learned-table" if embed_code else
                       "fixed-sinusoidal",
                       **dict(zip(_CONFIG_FIELDS, cfg_values)))
    (n_tensors,) = struct.unpack_from("<I", data, 52)
    pos = 56
    entries = []
    for _ in range(n_tensors):
        (name_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        name = data[pos:pos + name_len].decode("utf-8")
        pos += name_len
        _, ndim = struct.unpack_from("<BB", data, pos)
        pos += 2
        shape = struct.unpack_from(f"<{ndim}I", data, pos)
        pos += 4 * ndim
        _, _, p_off, p_len = struct.unpack_from("<4Q", data, pos)
        pos += 32
        entries.append((name, shape, p_off, p_len))
    region = data[pos:-4]
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(region) != crc:
        raise ValueError("checksum mismatch")
    tensors = {}
    for name, shape, p_off, p_len in entries:
        tensors[name] = np.frombuffer(region[p_off:p_off + p_len],
                                      dtype="<f4").reshape(shape).copy()
    return config, tensors


def ffe_write(features: np.ndarray) -> bytes:
    """(frames, 20) float32 feature array to .ffe bytes."""
    features = np.asarray(features, dtype=np.float32)
    if features.ndim != 2 or features.shape[1] != 20:
        raise ValueError(f"expected (frames, 20), got {features.shape}")
    return features.astype("<f4").tobytes()


def ffe_read(data: bytes) -> np.ndarray:
    if len(data) % 80 != 0:
        raise ValueError("truncated .ffe file")
    return np.frombuffer(data, dtype="<f4").reshape(-1, 20).copy()


def wav_read_pcm16(data: bytes) -> np.ndarray:
    """PCM16 mono 16 kHz WAV to float64 samples in [-1, 1)."""
    import io
    import wave

    with wave.open(io.BytesIO(data), "rb") as w:
        if (w.getnchannels(), w.getsampwidth(), w.getframerate()) != (1, 2, 16000):
            raise ValueError("expected PCM16 mono 16 kHz WAV")
        frames = w.readframes(w.getnframes())
    return np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0


def wav_write_pcm16(x: np.ndarray) -> bytes:
    import io
    import wave

    pcm = np.clip(np.rint(np.asarray(x, np.float64) * 32768.0),
                  -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(16000)
        w.writeframes(pcm.tobytes())
    return buf.getvalue()
