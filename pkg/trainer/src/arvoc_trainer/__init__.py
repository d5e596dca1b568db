"""Training harness for the arvoc vocoder.

Mirrors the engine's generator with autodiff, trains it unrolled (no
teacher forcing) with multi-resolution spectral and least-squares GAN
losses, and exports ".frgn" containers the engine loads unchanged.
"""

from .config import GenConfig, SpectralLossConfig, TrainSchedule
from .discriminator import SpectrogramDiscriminator, make_bank
from .generator import Generator
from .losses import (adv_loss, disc_loss, multires_spectral_loss,
                     spectral_loss, total_gen_loss)
from .train import adversarial_train, export_model, pretrain

__version__ = "0.1.0"
