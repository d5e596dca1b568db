"""Frame conditioning network: 32-dim features to four subframe latents.

Stack: dense (32 -> cond_hidden), causal 3-tap frame convolution, then a
4x transposed convolution down to the 2.5 ms subframe rate, each stage
tanh-activated and gated by a GLU. The convolution taps reach two frames
back, so the network needs no lookahead.
"""

from dataclasses import dataclass

import numpy as np

from . import nn
from .model import Model


@dataclass
class CondState:
    """Two previous post-FC stage outputs feeding the 3-tap convolution.

    In the int8 path these are stored pre-quantized, matching what the
    convolution consumes.
    """

    prev1: np.ndarray
    prev2: np.ndarray


class CondNet:
    """Immutable execution graph over a loaded model; share freely across
    streams, keep one CondState per stream."""

    def __init__(self, model: Model):
        cfg = model.config
        self.quantized = model.precision == "int8"
        self.sub_dim = cfg.cond_sub_dim
        self.hidden = cfg.cond_hidden
        # Input layer weights are float in both precisions (raw features
        # are not activation-bounded).
        self.fc = nn.DenseLayer(model.mat("cond.fc.w"), model.vec("cond.fc.b"), "tanh")
        self.fc_glu = nn.GluUnit(model.mat("cond.fc.glu.w"))
        self.conv = nn.Conv3Layer(model.conv_mat("cond.conv.w"), model.vec("cond.conv.b"))
        self.conv_glu = nn.GluUnit(model.mat("cond.conv.glu.w"))
        self.up = nn.UpConv4Layer(model.mat("cond.up.w"), model.vec("cond.up.b"),
                                  out_dim=cfg.cond_sub_dim)
        self.up_glu = nn.GluUnit(model.mat("cond.up.glu.w"))

    def init_state(self) -> CondState:
        zero = np.zeros(self.hidden, dtype=np.float32)
        return CondState(prev1=zero.copy(), prev2=zero.copy())

    def forward(self, state: CondState, x: np.ndarray) -> np.ndarray:
        """One frame of conditioning: (32,) input -> (4, cond_sub_dim)."""
        x = np.asarray(x, dtype=np.float32)
        if self.quantized:
            return self._forward_q8(state, x)
        h = nn.glu(self.fc_glu, nn.dense(self.fc, x))
        c = nn.glu(self.conv_glu, nn.conv3(self.conv, state.prev2, state.prev1, h))
        state.prev2, state.prev1 = state.prev1, h
        lat = nn.upconv4(self.up, c)
        return np.stack([nn.glu(self.up_glu, row) for row in lat])

    def _forward_q8(self, state: CondState, x: np.ndarray) -> np.ndarray:
        h = nn.dense(self.fc, x)
        hg = nn.glu_q8(self.fc_glu, nn.quantize_vec(h))
        hgq = nn.quantize_vec(hg)
        c = nn.conv3_q8(self.conv, state.prev2, state.prev1, hgq)
        cg = nn.glu_q8(self.conv_glu, nn.quantize_vec(c))
        state.prev2, state.prev1 = state.prev1, hgq
        lat = nn.upconv4_q8(self.up, nn.quantize_vec(cg))
        return np.stack([nn.glu_q8(self.up_glu, nn.quantize_vec(row)) for row in lat])
