"""Differentiable mirror of the engine's float synthesis path.

The generator is unrolled in time: every autoregressive input (previous
subframe, pitch prediction) comes from its own synthesized output, never
from ground truth, so there is no teacher forcing anywhere. Ground truth
enters training only as a loss target and as the discriminators' real
input.

Parameter names map 1:1 onto the ".frgn" tensor names with '.' replaced
by '_'. Arithmetic is float32 like the engine, except de-emphasis and the
output guard which run in float64 on both sides.
"""

import math

import numpy as np
import torch
from torch import nn

from .config import GenConfig
from .container import tensor_shapes

DEEMPH_ALPHA = 0.85
SOFT_CLIP_LIMIT = 0.98
SUBFRAME = 40
HISTORY = 360


def prepare_features(feats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Engine-equivalent per-frame inputs from raw .ffe rows.

    Returns (feats20, periods): the 20-dim vectors with the raw period
    still in column 18, and the rounded integer periods used for the
    pitch lookback.
    """
    feats = np.asarray(feats, dtype=np.float32)
    periods = np.array([int(round(min(max(float(p), 32.0), 320.0)))
                        for p in feats[:, 18]], dtype=np.int64)
    return feats, periods


def deemphasis(x: torch.Tensor, alpha: float = DEEMPH_ALPHA,
               chunk: int = 64) -> torch.Tensor:
    """Differentiable 1/(1 - alpha z^-1) scan in float64.

    Chunked lower-triangular matmuls are mathematically identical to the
    sequential recursion and autograd-friendly.
    """
    x = x.to(torch.float64)
    b, n = x.shape
    pad = (-n) % chunk
    if pad:
        x = torch.nn.functional.pad(x, (0, pad))
    i = torch.arange(chunk, dtype=torch.float64)
    tri = torch.where(i[:, None] >= i[None, :],
                      alpha ** (i[:, None] - i[None, :]).clamp(min=0),
                      torch.zeros((), dtype=torch.float64))
    decay = alpha ** (i + 1.0)
    carry = torch.zeros(b, dtype=torch.float64)
    out = []
    for c in range(x.shape[1] // chunk):
        xc = x[:, c * chunk:(c + 1) * chunk]
        yc = xc @ tri.T + carry[:, None] * decay[None, :]
        carry = yc[:, -1]
        out.append(yc)
    return torch.cat(out, dim=1)[:, :n]


def soft_clip(x: torch.Tensor, limit: float = SOFT_CLIP_LIMIT) -> torch.Tensor:
    a = x.abs()
    span = 1.0 - limit
    shaped = limit + span * torch.tanh((a - limit) / span)
    shaped = torch.minimum(shaped, torch.full((), 1.0 - 1e-7, dtype=x.dtype))
    return torch.where(a > limit, torch.sign(x) * shaped, x)


class Generator(nn.Module):
    def __init__(self, config: GenConfig = GenConfig(), init_scale: float = 1.0,
                 seed: int | None = None):
        super().__init__()
        self.config = config
        gen = torch.Generator()
        if seed is not None:
            gen.manual_seed(seed)
        for name, shape in tensor_shapes(config).items():
            if len(shape) == 1:
                t = torch.zeros(shape)
            else:
                fan_in = int(np.prod(shape[1:]))
                t = torch.randn(shape, generator=gen) * (init_scale / math.sqrt(fan_in))
            self.register_parameter(name.replace(".", "_"), nn.Parameter(t))

    def tensor(self, name: str) -> torch.Tensor:
        return getattr(self, name.replace(".", "_"))

    def export_tensors(self) -> dict[str, np.ndarray]:
        return {name: self.tensor(name).detach().cpu().numpy().astype(np.float32)
                for name in tensor_shapes(self.config)}

    def _net_input(self, feats: torch.Tensor, periods: torch.Tensor) -> torch.Tensor:
        """(B,F,20) raw features -> (B,F,32) network input, matching the
        engine: normalized period in column 18, embedding appended."""
        p64 = feats[..., 18].double().clamp(32.0, 320.0)
        phi = torch.log2(p64 / 32.0) / math.log2(10.0)
        x = torch.cat([feats[..., :18], phi[..., None].float(),
                       feats[..., 19:20]], dim=-1)
        if self.config.embedding_kind == "learned-table":
            idx = (periods - self.config.pitch_min).clamp(
                0, self.config.pitch_max - self.config.pitch_min)
            emb = self.tensor("embed.table")[idx]
        else:
            k = torch.arange(1, 7, dtype=torch.float64)
            ang = 2.0 * math.pi * k[None, None, :] * phi[..., None]
            emb = torch.cat([torch.sin(ang), torch.cos(ang)], dim=-1).float()
        return torch.cat([x, emb], dim=-1)

    def _lin(self, name: str, x: torch.Tensor) -> torch.Tensor:
        return x @ self.tensor(name + ".w").T + self.tensor(name + ".b")

    def _glu(self, name: str, x: torch.Tensor) -> torch.Tensor:
        return x * torch.sigmoid(x @ self.tensor(name + ".glu.w").T)

    def conditioning(self, feats: torch.Tensor, periods: torch.Tensor):
        """Frame-rate stack: (B,F,...) -> latents (B,F,4,d), gains
        (B,F,4,1), gates (B,F,4,40)."""
        cfg = self.config
        x = self._net_input(feats, periods)
        h = self._glu("cond.fc", torch.tanh(self._lin("cond.fc", x)))
        hpad = torch.nn.functional.pad(h, (0, 0, 2, 0))  # two zero frames back
        f = feats.shape[1]
        conv_in = torch.cat([hpad[:, 0:f], hpad[:, 1:f + 1], hpad[:, 2:f + 2]],
                            dim=-1)
        w = self.tensor("cond.conv.w")
        w_exec = w.permute(0, 2, 1).reshape(w.shape[0], -1)
        c = torch.tanh(conv_in @ w_exec.T + self.tensor("cond.conv.b"))
        c = self._glu("cond.conv", c)
        lat = torch.tanh(self._lin("cond.up", c)).view(-1, f, 4, cfg.cond_sub_dim)
        lat = self._glu("cond.up", lat)
        gains = torch.exp(self._lin("sub.gain", lat))
        gates = torch.sigmoid(self._lin("sub.gate", lat))
        return lat, gains, gates

    def forward(self, feats: torch.Tensor, periods: torch.Tensor,
                zero_feedback: bool = False) -> torch.Tensor:
        """Unrolled synthesis: (B,F,20) features + (B,F) integer periods
        -> (B, F*160) final-domain signal with gradient flow end to end."""
        b, f, _ = feats.shape
        lat, gains, gates = self.conditioning(feats, periods)
        hist = torch.zeros(b, HISTORY, dtype=torch.float32, device=feats.device)
        prev = torch.zeros(b, SUBFRAME, dtype=torch.float32, device=feats.device)
        cols = torch.arange(SUBFRAME, device=feats.device)
        names = [f"sub.l{i}" for i in range(1, self.config.sub_layers + 1)]
        out = []
        for t in range(f):
            off = torch.where(periods[:, t] >= SUBFRAME,
                              periods[:, t], 2 * periods[:, t])
            idx = (HISTORY - off)[:, None] + cols[None, :]
            for s in range(4):
                g = gains[:, t, s]
                fb_prev = prev / g
                fb_pitch = gates[:, t, s] * (hist.gather(1, idx) / g)
                if zero_feedback:
                    fb_prev = torch.zeros_like(fb_prev)
                    fb_pitch = torch.zeros_like(fb_pitch)
                fb = torch.cat([fb_prev, fb_pitch], dim=1)
                h = torch.cat([lat[:, t, s], fb], dim=1)
                for name in names:
                    a = self._glu(name, torch.tanh(self._lin(name, h)))
                    h = torch.cat([a, fb], dim=1)
                y = torch.tanh(self._lin("sub.out", h)) * g
                out.append(y)
                hist = torch.cat([hist[:, SUBFRAME:], y], dim=1)
                prev = y
        raw = torch.cat(out, dim=1)
        return soft_clip(deemphasis(raw)).float()
