"""Training losses: multi-resolution spectral and least-squares GAN terms.

All losses take the final-domain (de-emphasized) signals; values are
nonnegative and the total generator loss is exactly the adversarial term
plus the spectral term.
"""

import warnings

import torch

from .config import SpectralLossConfig


def stft_mag(x: torch.Tensor, window_size: int) -> torch.Tensor:
    """One-sided magnitudes, periodic Hann, hop = window/4, no padding."""
    if x.shape[-1] < window_size:
        raise ValueError(f"signal shorter than window {window_size}")
    w = torch.hann_window(window_size, periodic=True, dtype=x.dtype,
                          device=x.device)
    spec = torch.stft(x, n_fft=window_size, hop_length=window_size // 4,
                      win_length=window_size, window=w, center=False,
                      return_complex=True)
    return spec.abs()


def spectral_loss(x_hat: torch.Tensor, x: torch.Tensor, window_size: int,
                  gamma: float = 0.5, floor: float = 1e-9) -> torch.Tensor:
    """Sum over frames and bins of | |X_hat|^gamma - |X|^gamma |, averaged
    over the batch dimension."""
    if x_hat.shape != x.shape:
        raise ValueError(f"shape mismatch {x_hat.shape} vs {x.shape}")
    squeeze = x_hat.dim() == 1
    if squeeze:
        x_hat, x = x_hat[None], x[None]
    a = stft_mag(x_hat, window_size).clamp(min=floor) ** gamma
    b = stft_mag(x, window_size).clamp(min=floor) ** gamma
    return (a - b).abs().sum(dim=(1, 2)).mean()


def multires_spectral_loss(x_hat: torch.Tensor, x: torch.Tensor,
                           cfg: SpectralLossConfig = SpectralLossConfig()) -> torch.Tensor:
    """Sum of spectral losses over the resolution ladder; resolutions the
    signal is too short for are dropped with a warning."""
    n = x.shape[-1]
    total = None
    for w in cfg.windows:
        if n < w:
            warnings.warn(f"signal of {n} samples too short for window {w}; "
                          f"dropping this resolution")
            continue
        term = spectral_loss(x_hat, x, w, cfg.gamma, cfg.floor)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("signal too short for every spectral resolution")
    return total


def feature_matching(feats_real: list[torch.Tensor],
                     feats_fake: list[torch.Tensor]) -> torch.Tensor:
    """Mean of per-layer mean L1 distances between hidden activations."""
    terms = [(a - b).abs().mean() for a, b in zip(feats_real, feats_fake)]
    return sum(terms) / len(terms)


def adv_terms(bank, x: torch.Tensor,
              x_hat: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Bank-averaged (least-squares, feature-matching) generator terms;
    discriminator parameters receive no gradient from this pass."""
    lsq = x_hat.new_zeros(())
    feat = x_hat.new_zeros(())
    for disc in bank:
        score_fake, feats_fake = disc(x_hat)
        with torch.no_grad():
            _, feats_real = disc(x)
        lsq = lsq + ((1.0 - score_fake) ** 2).mean()
        feat = feat + feature_matching([f.detach() for f in feats_real],
                                       feats_fake)
    return lsq / len(bank), feat / len(bank)


def adv_loss(bank, x: torch.Tensor, x_hat: torch.Tensor) -> torch.Tensor:
    lsq, feat = adv_terms(bank, x, x_hat)
    return lsq + feat


def total_gen_loss(bank, x: torch.Tensor, x_hat: torch.Tensor,
                   cfg: SpectralLossConfig = SpectralLossConfig()):
    """Returns (total, adversarial, spectral); total = adv + spectral."""
    adv = adv_loss(bank, x, x_hat)
    spec = multires_spectral_loss(x_hat, x, cfg)
    return adv + spec, adv, spec


def disc_loss(bank, x: torch.Tensor, x_hat: torch.Tensor) -> torch.Tensor:
    """Discriminator-side least-squares loss, mean over the bank; the
    generator output is detached."""
    x_hat = x_hat.detach()
    total = x.new_zeros(())
    for disc in bank:
        score_fake, _ = disc(x_hat)
        score_real, _ = disc(x)
        total = total + (score_fake ** 2).mean() + ((1.0 - score_real) ** 2).mean()
    return total / len(bank)
