"""Minimal neural kernels: dense, 3-tap conv, 4x up-conv, GLU.

Every kernel has a float32 reference path and an int8 path. The int8
scheme is symmetric per-output-row for weights (scale = row_max / 127)
and a fixed 1/127 scale for activations, which is lossless in range
because every fed-forward activation is tanh-, sigmoid-, or
normalization-bounded to [-1, 1].

The int8 matvec is computed with float32 BLAS on integer-valued arrays:
all products are <= 127*127 and any partial sum stays below 2**24, so
float32 arithmetic reproduces 32-bit integer accumulation bit-exactly
regardless of summation order. This caps supported input widths at
_MAX_COLS columns.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

ACT_SCALE = np.float32(1.0 / 127.0)
_MAX_COLS = (1 << 24) // (127 * 127)  # 1040


class Mat:
    """A weight matrix in float32 or int8-with-per-row-scale form."""

    __slots__ = ("w", "q", "scale", "_qf", "_dq")

    def __init__(self, w: np.ndarray | None = None, q: np.ndarray | None = None,
                 scale: np.ndarray | None = None):
        if (w is None) == (q is None):
            raise ValueError("pass exactly one of w (float) or q (int8)")
        if w is not None:
            w = np.ascontiguousarray(w, dtype=np.float32)
            if w.ndim != 2:
                raise ValueError(f"expected 2-d weights, got shape {w.shape}")
            self.w, self.q, self.scale = w, None, None
            self._qf = self._dq = None
        else:
            q = np.asarray(q)
            if q.dtype != np.int8 or q.ndim != 2:
                raise ValueError("q must be a 2-d int8 array")
            scale = np.asarray(scale, dtype=np.float32)
            if scale.shape != (q.shape[0],):
                raise ValueError(f"scales {scale.shape} do not match {q.shape[0]} rows")
            if not np.all(scale > 0):
                raise ValueError("int8 scales must be positive")
            if q.shape[1] > _MAX_COLS:
                raise ValueError(f"int8 input width {q.shape[1]} exceeds {_MAX_COLS}")
            self.w, self.q, self.scale = None, q, scale
            self._qf = np.ascontiguousarray(q, dtype=np.float32)
            self._dq = scale * ACT_SCALE

    @property
    def quantized(self) -> bool:
        return self.q is not None

    @property
    def shape(self) -> tuple[int, int]:
        m = self.w if self.w is not None else self.q
        return m.shape


@dataclass
class DenseLayer:
    mat: Mat
    b: np.ndarray
    activation: str = "linear"


@dataclass
class GluUnit:
    mat: Mat  # square gate matrix, no bias


@dataclass
class Conv3Layer:
    """Causal 3-tap frame convolution, stored in (out, 3*in) execution
    layout with tap blocks ordered [t-2 | t-1 | t]."""

    mat: Mat
    b: np.ndarray


@dataclass
class UpConv4Layer:
    """4x frame-to-subframe transposed convolution: (4*out, in) weights."""

    mat: Mat
    b: np.ndarray
    out_dim: int


def apply_activation(y: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(y)
    if kind == "sigmoid":
        return expit(y)
    if kind == "exp":
        with np.errstate(over="ignore"):  # inf is caught by the caller
            return np.exp(y)
    if kind == "linear":
        return y
    raise ValueError(f"unknown activation {kind!r}")


def quantize_vec(x: np.ndarray) -> np.ndarray:
    """Symmetric activation quantization: integer-valued float32 in
    [-127, 127]. Values outside [-1, 1] saturate."""
    x = np.asarray(x, dtype=np.float32)
    return np.rint(np.clip(x, -1.0, 1.0) * np.float32(127.0)).astype(np.float32)


def dequantize_vec(xq: np.ndarray) -> np.ndarray:
    return xq * ACT_SCALE


def _float_matvec(mat: Mat, x: np.ndarray) -> np.ndarray:
    if mat.quantized:
        raise TypeError("float kernel called on an int8 matrix; use the _q8 op")
    x = np.asarray(x, dtype=np.float32)
    if x.shape != (mat.shape[1],):
        raise ValueError(f"input {x.shape} does not match weights {mat.shape}")
    return mat.w @ x


def _q8_matvec(mat: Mat, xq: np.ndarray) -> np.ndarray:
    if not mat.quantized:
        raise TypeError("int8 kernel called on a float matrix; use the float op")
    if xq.shape != (mat.shape[1],):
        raise ValueError(f"input {xq.shape} does not match weights {mat.shape}")
    # Exact integer accumulation (see module docstring), then dequantize.
    return (mat._qf @ xq) * mat._dq


def dense(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    """activation(W @ x + b), float32 path."""
    return apply_activation(_float_matvec(layer.mat, x) + layer.b, layer.activation)


def dense_q8(layer: DenseLayer, xq: np.ndarray) -> np.ndarray:
    """Int8 dense on a pre-quantized input vector (see quantize_vec).

    Accumulates exactly as 32-bit integers would, dequantizes with
    row_scale/127, adds the float bias, applies the activation in float.
    """
    return apply_activation(_q8_matvec(layer.mat, xq) + layer.b, layer.activation)


def glu(unit: GluUnit, x: np.ndarray) -> np.ndarray:
    """Gated linear unit x * sigmoid(W @ x)."""
    return x * expit(_float_matvec(unit.mat, x))


def glu_q8(unit: GluUnit, xq: np.ndarray) -> np.ndarray:
    return dequantize_vec(xq) * expit(_q8_matvec(unit.mat, xq))


def conv3(layer: Conv3Layer, f_prev2: np.ndarray, f_prev1: np.ndarray,
          f_now: np.ndarray) -> np.ndarray:
    x = np.concatenate([f_prev2, f_prev1, f_now]).astype(np.float32, copy=False)
    return np.tanh(_float_matvec(layer.mat, x) + layer.b)


def conv3_q8(layer: Conv3Layer, f_prev2: np.ndarray, f_prev1: np.ndarray,
             f_now: np.ndarray) -> np.ndarray:
    xq = np.concatenate([f_prev2, f_prev1, f_now])
    return np.tanh(_q8_matvec(layer.mat, xq) + layer.b)


def upconv4(layer: UpConv4Layer, f: np.ndarray) -> np.ndarray:
    """Four subframe vectors per frame vector, shape (4, out_dim)."""
    y = _float_matvec(layer.mat, f) + layer.b
    return np.tanh(y.reshape(4, layer.out_dim))


def upconv4_q8(layer: UpConv4Layer, fq: np.ndarray) -> np.ndarray:
    y = _q8_matvec(layer.mat, fq) + layer.b
    return np.tanh(y.reshape(4, layer.out_dim))
