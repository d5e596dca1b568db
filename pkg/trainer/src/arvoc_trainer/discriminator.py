"""Spectrogram discriminator bank: six resolutions, 2-d convs.

Discriminator k ingests the log-magnitude spectrogram of a size-2**(k+5)
STFT with 75% overlap (the transform is treated as part of the
discriminator). Frequency strides shrink the frequency extent by 2**(k-1)
across the stack so every resolution sees a constant frequency span per
receptive field, and a sine-cosine frequency positional embedding is
concatenated to the input of every conv layer.
"""

import torch
from torch import nn

from .losses import stft_mag

N_DISCRIMINATORS = 6
_DEPTH = 5
_LOG_FLOOR = 1e-9


class SpectrogramDiscriminator(nn.Module):
    def __init__(self, k: int, base_channels: int = 32):
        super().__init__()
        if not 1 <= k <= N_DISCRIMINATORS:
            raise ValueError(f"k must be in 1..{N_DISCRIMINATORS}")
        self.k = k
        self.n_fft = 2 ** (k + 5)
        convs = []
        ch_in = 1
        for layer in range(_DEPTH):
            ch_out = min(base_channels * (2 if layer >= 2 else 1), 64)
            f_stride = 2 if layer < (k - 1) else 1
            convs.append(nn.Conv2d(ch_in + 2, ch_out, kernel_size=(3, 9),
                                   stride=(f_stride, 1), padding=(1, 4)))
            ch_in = ch_out
        self.convs = nn.ModuleList(convs)
        self.post = nn.Conv2d(ch_in + 2, 1, kernel_size=(3, 3), padding=(1, 1))
        self.act = nn.LeakyReLU(0.2)

    def log_spectrogram(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() == 1:
            x = x[None]
        mags = stft_mag(x.float(), self.n_fft)
        return torch.log(mags.clamp(min=_LOG_FLOOR))[:, None]  # (B,1,bins,frames)

    @staticmethod
    def _with_freq_embedding(h: torch.Tensor) -> torch.Tensor:
        bins = h.shape[2]
        phi = torch.linspace(0.0, 1.0, bins, device=h.device, dtype=h.dtype)
        pos = torch.stack([torch.sin(torch.pi * phi), torch.cos(torch.pi * phi)])
        pos = pos[None, :, :, None].expand(h.shape[0], 2, bins, h.shape[3])
        return torch.cat([h, pos], dim=1)

    def forward(self, x: torch.Tensor):
        """Returns (score_map, hidden feature list of length 5)."""
        h = self.log_spectrogram(x)
        feats = []
        for conv in self.convs:
            h = self.act(conv(self._with_freq_embedding(h)))
            feats.append(h)
        score = self.post(self._with_freq_embedding(h))
        return score, feats


def make_bank(base_channels: int = 32, seed: int | None = None) -> nn.ModuleList:
    if seed is not None:
        torch.manual_seed(seed)
    return nn.ModuleList([SpectrogramDiscriminator(k, base_channels)
                          for k in range(1, N_DISCRIMINATORS + 1)])
