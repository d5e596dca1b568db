import shutil

import numpy as np
import pytest
import torch

from arvoc_trainer.config import GenConfig

TINY = GenConfig(cond_hidden=32, cond_sub_dim=16, sub_hidden=48, sub_layers=2)

needs_engine = pytest.mark.skipif(shutil.which("arvoc") is None,
                                  reason="arvoc CLI not on PATH")


def random_features(n_frames, seed=0):
    """Plausible raw .ffe rows: BFCC-scaled values, period, voicing."""
    rng = np.random.default_rng(seed)
    feats = np.zeros((n_frames, 20), np.float32)
    feats[:, :18] = rng.normal(-2.0, 1.0, (n_frames, 18)).astype(np.float32)
    feats[:, 18] = rng.uniform(32.0, 320.0, n_frames).astype(np.float32)
    feats[:, 19] = rng.uniform(0.0, 1.0, n_frames).astype(np.float32)
    return feats


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    from arvoc_trainer.data import SpeechDataset
    from arvoc_trainer.toydata import make_toy_dataset

    root = tmp_path_factory.mktemp("toy")
    make_toy_dataset(root, n_files=2, seconds=2.0, seed=3)
    return SpeechDataset(root)


@pytest.fixture(autouse=True)
def _torch_seed():
    torch.manual_seed(0)
