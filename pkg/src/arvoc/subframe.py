"""Autoregressive subframe synthesis: 40 samples per 2.5 ms step.

Each subframe is generated from the conditioning latent plus two feedback
vectors: the previous subframe and a gated pitch prediction read from the
synthesis history. Both feedbacks are renormalized by the gain of the
subframe where they are used, not the one where they were generated. The
history holds raw (post-gain, pre-de-emphasis) samples; normalization
happens at read time.
"""

from dataclasses import dataclass, field

import numpy as np

from . import dsp, nn
from .model import Model

SUBFRAME_LEN = 40
HISTORY_LEN = 360  # pitch_max + subframe_len


class NumericError(FloatingPointError):
    """Non-finite value produced during synthesis; the stream is unusable."""


@dataclass
class SubframeConditioning:
    """Per-2.5 ms conditioning: latent vector, gain, per-sample pitch gate."""

    latent: np.ndarray
    gain: float
    pitch_gate: np.ndarray


@dataclass
class SynthState:
    """Per-stream autoregressive state, zero at stream start."""

    history: np.ndarray = field(
        default_factory=lambda: np.zeros(HISTORY_LEN, dtype=np.float32))
    prev_subframe: np.ndarray = field(
        default_factory=lambda: np.zeros(SUBFRAME_LEN, dtype=np.float32))
    prev_gain: float = 1.0
    deemph: dsp.EmphasisState = field(default_factory=dsp.EmphasisState)


def pitch_lookback(period: int, subframe_len: int = SUBFRAME_LEN) -> int:
    """Effective lag: the period itself, or twice it when shorter than a
    subframe (so the prediction never reads samples being generated)."""
    return period if period >= subframe_len else 2 * period


def pitch_predict(state: SynthState, period: int, gain: float) -> np.ndarray:
    """Gain-normalized prediction for the next subframe from the history."""
    off = pitch_lookback(int(period))
    start = HISTORY_LEN - off
    return state.history[start:start + SUBFRAME_LEN] / np.float32(gain)


class SubframeNet:
    """Immutable execution graph; one SynthState per stream."""

    def __init__(self, model: Model):
        cfg = model.config
        self.quantized = model.precision == "int8"
        self.gain = nn.DenseLayer(model.mat("sub.gain.w"), model.vec("sub.gain.b"), "exp")
        self.gate = nn.DenseLayer(model.mat("sub.gate.w"), model.vec("sub.gate.b"), "sigmoid")
        self.hidden = []
        self.glus = []
        for i in range(1, cfg.sub_layers + 1):
            self.hidden.append(nn.DenseLayer(model.mat(f"sub.l{i}.w"),
                                             model.vec(f"sub.l{i}.b"), "tanh"))
            self.glus.append(nn.GluUnit(model.mat(f"sub.l{i}.glu.w")))
        self.out = nn.DenseLayer(model.mat("sub.out.w"), model.vec("sub.out.b"), "tanh")

    def init_state(self) -> SynthState:
        return SynthState()

    def conditioning(self, latent: np.ndarray) -> SubframeConditioning:
        """Gain and pitch gate from one latent; both read the float latent
        (gain/gate neurons stay in real arithmetic in every precision)."""
        latent = np.asarray(latent, dtype=np.float32)
        g = float(nn.dense(self.gain, latent)[0])
        gate = nn.dense(self.gate, latent)
        if not np.isfinite(g):
            raise NumericError("gain overflowed")
        return SubframeConditioning(latent=latent, gain=g, pitch_gate=gate)

    def forward(self, state: SynthState, sc: SubframeConditioning,
                period: int) -> np.ndarray:
        """One subframe of raw (pre-de-emphasis) samples; updates state."""
        g = np.float32(sc.gain)
        fb_prev = state.prev_subframe / g
        fb_pitch = (sc.pitch_gate * pitch_predict(state, period, sc.gain)).astype(np.float32)
        if self.quantized:
            y = self._stack_q8(sc.latent, fb_prev, fb_pitch)
        else:
            y = self._stack(sc.latent, fb_prev, fb_pitch)
        samples = y * g
        if not np.all(np.isfinite(samples)):
            raise NumericError("non-finite subframe output")
        state.history[:-SUBFRAME_LEN] = state.history[SUBFRAME_LEN:]
        state.history[-SUBFRAME_LEN:] = samples
        state.prev_subframe = samples
        state.prev_gain = float(g)
        return samples

    def _stack(self, latent, fb_prev, fb_pitch):
        fb = np.concatenate([fb_prev, fb_pitch])
        h = np.concatenate([latent, fb])
        for layer, glu in zip(self.hidden, self.glus):
            h = np.concatenate([nn.glu(glu, nn.dense(layer, h)), fb])
        return nn.dense(self.out, h)

    def _stack_q8(self, latent, fb_prev, fb_pitch):
        fbq = np.concatenate([nn.quantize_vec(fb_prev), nn.quantize_vec(fb_pitch)])
        h = np.concatenate([nn.quantize_vec(latent), fbq])
        for layer, glu in zip(self.hidden, self.glus):
            a = nn.glu_q8(glu, nn.quantize_vec(nn.dense_q8(layer, h)))
            h = np.concatenate([nn.quantize_vec(a), fbq])
        return nn.dense_q8(self.out, h)

    def synth_frame(self, state: SynthState, conds: list[SubframeConditioning],
                    period: float) -> np.ndarray:
        """Four strictly-ordered subframes, concatenated and de-emphasized.

        Returns 160 float64 samples in the final (de-emphasized) domain.
        """
        if len(conds) != 4:
            raise ValueError(f"expected 4 subframe conditionings, got {len(conds)}")
        t = int(round(min(max(float(period), 32.0), 320.0)))
        raw = np.concatenate([self.forward(state, sc, t) for sc in conds])
        return dsp.deemphasis(raw, dsp.DEEMPH_ALPHA, state.deemph)
