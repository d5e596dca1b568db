"""Desk-scale training loops: spectral pretraining, then adversarial
fine-tuning, with checkpoints, a training-curve CSV, and .frgn export."""

import csv
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from .config import GenConfig, SpectralLossConfig, TrainSchedule
from .container import save_frgn
from .discriminator import make_bank
from .generator import Generator
from .losses import adv_terms, disc_loss, multires_spectral_loss

CURVE_FIELDS = ("step", "spectral", "adversarial", "feature_matching",
                "discriminator")


class TrainingDiverged(RuntimeError):
    """Loss went non-finite; a checkpoint was written before aborting."""


def save_checkpoint(gen: Generator, path) -> None:
    torch.save({"config": asdict(gen.config), "state": gen.state_dict()}, path)


def load_checkpoint(path) -> Generator:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    gen = Generator(GenConfig(**blob["config"]))
    gen.load_state_dict(blob["state"])
    return gen


def export_model(gen: Generator) -> bytes:
    """Float .frgn container the engine loads directly."""
    return save_frgn(gen.config, gen.export_tensors())


def _write_curve(path, rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CURVE_FIELDS)
        writer.writerows(rows)


def _sample_seq_len(rng, schedule: TrainSchedule) -> int:
    if rng.random() < schedule.pretrain_long_frac:
        return schedule.pretrain_long_seq
    return schedule.pretrain_seq


def pretrain(gen: Generator, dataset, schedule: TrainSchedule = TrainSchedule(),
             out_dir=None, updates: int | None = None, log_every: int = 50,
             loss_cfg: SpectralLossConfig = SpectralLossConfig()):
    """Minimize the multi-resolution spectral loss over the unrolled
    generator. Returns the training-curve rows."""
    out_dir = Path(out_dir) if out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(schedule.seed)
    rng = np.random.default_rng(schedule.seed)
    opt = torch.optim.Adam(gen.parameters(), lr=schedule.pretrain_lr,
                           betas=(schedule.beta1, schedule.beta2))
    rows = []
    n_updates = updates if updates is not None else schedule.pretrain_updates
    for step in range(n_updates):
        seq = _sample_seq_len(rng, schedule)
        feats, periods, target = dataset.sample(rng, schedule.pretrain_batch, seq)
        x_hat = gen(feats, periods)
        loss = multires_spectral_loss(x_hat, target, loss_cfg)
        if not torch.isfinite(loss):
            if out_dir:
                save_checkpoint(gen, out_dir / "pretrain_abort.pt")
            raise TrainingDiverged(f"spectral loss non-finite at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if step % log_every == 0 or step == n_updates - 1:
            rows.append((step, loss.item(), "", "", ""))
    if out_dir:
        save_checkpoint(gen, out_dir / "pretrain_final.pt")
        _write_curve(out_dir / "pretrain_curve.csv", rows)
        (out_dir / "pretrain.frgn").write_bytes(export_model(gen))
    return rows


def adversarial_train(gen: Generator, bank, dataset,
                      schedule: TrainSchedule = TrainSchedule(),
                      out_dir=None, steps: int | None = None,
                      disc_lr: float | None = None, log_every: int = 20,
                      loss_cfg: SpectralLossConfig = SpectralLossConfig()):
    """Alternating least-squares GAN steps on long sequences. Both
    optimizers are Adam with the schedule's betas; the generator keeps the
    fixed low adversarial learning rate."""
    out_dir = Path(out_dir) if out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(schedule.seed + 1)
    rng = np.random.default_rng(schedule.seed + 1)
    if bank is None:
        bank = make_bank(seed=schedule.seed)
    opt_g = torch.optim.Adam(gen.parameters(), lr=schedule.adv_lr,
                             betas=(schedule.beta1, schedule.beta2))
    opt_d = torch.optim.Adam(bank.parameters(),
                             lr=disc_lr if disc_lr is not None else schedule.adv_lr,
                             betas=(schedule.beta1, schedule.beta2))
    rows = []
    n_steps = steps if steps is not None else schedule.adv_steps
    for step in range(n_steps):
        feats, periods, target = dataset.sample(rng, schedule.adv_batch,
                                                schedule.adv_seq)
        # discriminator step, generator frozen
        with torch.no_grad():
            x_hat = gen(feats, periods)
        ld = disc_loss(bank, target, x_hat)
        opt_d.zero_grad()
        ld.backward()
        opt_d.step()
        # generator step, discriminators frozen (their grads are discarded)
        x_hat = gen(feats, periods)
        lsq, feat = adv_terms(bank, target, x_hat)
        spec = multires_spectral_loss(x_hat, target, loss_cfg)
        lg = lsq + feat + spec
        if not (torch.isfinite(lg) and torch.isfinite(ld)):
            if out_dir:
                save_checkpoint(gen, out_dir / "adversarial_abort.pt")
            raise TrainingDiverged(f"loss non-finite at step {step}")
        opt_g.zero_grad()
        lg.backward()
        opt_g.step()
        if step % log_every == 0 or step == n_steps - 1:
            rows.append((step, spec.item(), lsq.item(), feat.item(), ld.item()))
    if out_dir:
        save_checkpoint(gen, out_dir / "adversarial_final.pt")
        _write_curve(out_dir / "adversarial_curve.csv", rows)
        (out_dir / "adversarial.frgn").write_bytes(export_model(gen))
    return rows
