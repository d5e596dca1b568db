import numpy as np
import pytest
import torch

from arvoc_trainer.config import SpectralLossConfig
from arvoc_trainer.losses import (adv_loss, adv_terms, disc_loss,
                                  multires_spectral_loss, spectral_loss,
                                  stft_mag, total_gen_loss)


class StubDisc(torch.nn.Module):
    """Constant-score discriminator with deterministic 'features'."""

    def __init__(self, score):
        super().__init__()
        self.score = score

    def forward(self, x):
        if x.dim() == 1:
            x = x[None]
        s = torch.full((x.shape[0], 1, 4, 4), self.score, dtype=x.dtype)
        feats = [x[:, None, None, :64] * (i + 1) for i in range(3)]
        return s, feats


def rand_pair(n=400, seed=0, dtype=torch.float64):
    g = torch.Generator().manual_seed(seed)
    x = torch.randn(n, generator=g, dtype=dtype) * 0.3
    y = torch.randn(n, generator=g, dtype=dtype) * 0.3
    return x, y


def test_spectral_loss_zero_for_identical():
    x, _ = rand_pair()
    assert spectral_loss(x, x, 80).item() == 0.0


def test_spectral_loss_symmetric():
    x, y = rand_pair(seed=1)
    assert spectral_loss(x, y, 160).item() == pytest.approx(
        spectral_loss(y, x, 160).item(), rel=1e-12)


def test_spectral_loss_rejects_mismatch():
    x, y = rand_pair()
    with pytest.raises(ValueError):
        spectral_loss(x[:-1], y, 80)


def test_spectral_loss_gradient_matches_finite_differences():
    x, y = rand_pair(n=400, seed=2)
    x = x.clone().requires_grad_(True)
    loss = spectral_loss(x, y, 80, floor=1e-8)
    loss.backward()
    rng = np.random.default_rng(3)
    eps = 1e-6
    for i in rng.integers(0, 400, size=8):
        xp, xm = x.detach().clone(), x.detach().clone()
        xp[i] += eps
        xm[i] -= eps
        fd = (spectral_loss(xp, y, 80, floor=1e-8).item()
              - spectral_loss(xm, y, 80, floor=1e-8).item()) / (2 * eps)
        assert fd == pytest.approx(x.grad[i].item(), rel=1e-3, abs=1e-9)


def test_multires_equals_manual_sum():
    x, y = rand_pair(n=3000, seed=4)
    total = multires_spectral_loss(x, y)
    manual = sum(spectral_loss(x, y, w) for w in (80, 160, 320, 640, 1280, 2560))
    assert total.item() == pytest.approx(manual.item(), rel=1e-12)


def test_multires_positive_for_distinct_signals():
    _, y = rand_pair(n=3000, seed=5)
    assert multires_spectral_loss(torch.zeros_like(y), y).item() > 0.0


def test_multires_drops_infeasible_resolutions():
    x, y = rand_pair(n=400, seed=6)
    with pytest.warns(UserWarning):
        total = multires_spectral_loss(x, y)
    manual = sum(spectral_loss(x, y, w) for w in (80, 160, 320))
    assert total.item() == pytest.approx(manual.item(), rel=1e-12)
    with pytest.raises(ValueError), pytest.warns(UserWarning):
        multires_spectral_loss(x[:32], y[:32])


def test_stft_mag_matches_engine_framing():
    x, _ = rand_pair(n=500, seed=7)
    m = stft_mag(x[None], 80)
    assert m.shape == (1, 41, 1 + (500 - 80) // 20)
    frame0 = x[:80] * torch.hann_window(80, periodic=True, dtype=x.dtype)
    ref = torch.fft.rfft(frame0).abs()
    assert torch.allclose(m[0, :, 0], ref, atol=1e-12)


def test_adv_loss_zero_for_perfect_score_and_identical_signals():
    bank = [StubDisc(1.0) for _ in range(6)]
    x, _ = rand_pair(n=256, seed=8, dtype=torch.float32)
    assert adv_loss(bank, x, x).item() == 0.0


def test_adv_loss_nonnegative():
    bank = [StubDisc(0.2) for _ in range(6)]
    x, y = rand_pair(n=256, seed=9, dtype=torch.float32)
    assert adv_loss(bank, x, y).item() >= 0.0


def test_total_is_exactly_adv_plus_spectral():
    bank = [StubDisc(0.3) for _ in range(6)]
    x, y = rand_pair(n=3000, seed=10, dtype=torch.float64)
    total, adv, spec = total_gen_loss(bank, x, y)
    assert total.item() == (adv + spec).item()
    lsq, feat = adv_terms(bank, x, y)
    assert adv.item() == (lsq + feat).item()


def test_disc_loss_perfect_discriminator_is_zero():
    x, y = rand_pair(n=256, seed=11, dtype=torch.float32)

    class Perfect(torch.nn.Module):
        def forward(self, s):
            val = 1.0 if s is x or torch.equal(s, x) else 0.0
            return torch.full((1, 1, 2, 2), val), [s[None, None, None, :16]]

    assert disc_loss([Perfect() for _ in range(6)], x, y).item() == 0.0


def test_disc_loss_constant_half_is_half():
    bank = [StubDisc(0.5) for _ in range(6)]
    x, y = rand_pair(n=256, seed=12, dtype=torch.float32)
    assert disc_loss(bank, x, y).item() == pytest.approx(0.5, abs=1e-12)


def test_glu_gradient_matches_finite_differences():
    g = torch.Generator().manual_seed(13)
    w = (torch.randn(6, 6, generator=g, dtype=torch.float64) / 3).requires_grad_(True)
    x = torch.randn(6, generator=g, dtype=torch.float64)
    (x * torch.sigmoid(w @ x)).sum().backward()
    eps = 1e-6
    rng = np.random.default_rng(14)
    for _ in range(6):
        i, j = rng.integers(0, 6, size=2)
        wp, wm = w.detach().clone(), w.detach().clone()
        wp[i, j] += eps
        wm[i, j] -= eps
        fd = ((x * torch.sigmoid(wp @ x)).sum().item()
              - (x * torch.sigmoid(wm @ x)).sum().item()) / (2 * eps)
        assert fd == pytest.approx(w.grad[i, j].item(), rel=1e-3, abs=1e-10)


def test_gamma_validation():
    with pytest.raises(ValueError):
        SpectralLossConfig(gamma=0.0)
