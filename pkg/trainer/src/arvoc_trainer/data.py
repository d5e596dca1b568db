"""Training data: a folder of WAVs plus cached .ffe features.

Feature extraction is delegated to the engine's `arvoc analyze` command,
so training consumes exactly the features the engine will see at
inference time.
"""

import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .container import ffe_read, wav_read_pcm16
from .generator import prepare_features

FRAME = 160


@dataclass
class Utterance:
    name: str
    feats: np.ndarray    # (F, 20) float32, raw period in column 18
    periods: np.ndarray  # (F,) int64
    audio: np.ndarray    # (F * 160,) float32, natural domain


def extract_features(wav_path: Path, ffe_path: Path,
                     arvoc_bin: str = "arvoc") -> None:
    proc = subprocess.run([arvoc_bin, "analyze", str(wav_path), str(ffe_path)],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"feature extraction failed for {wav_path}: "
                           f"{proc.stderr.strip()}")


class SpeechDataset:
    def __init__(self, wav_dir, cache_dir=None, arvoc_bin: str = "arvoc"):
        wav_dir = Path(wav_dir)
        cache = Path(cache_dir) if cache_dir else wav_dir / "ffe_cache"
        cache.mkdir(parents=True, exist_ok=True)
        self.utterances: list[Utterance] = []
        for wav_path in sorted(wav_dir.glob("*.wav")):
            ffe_path = cache / (wav_path.stem + ".ffe")
            if not ffe_path.exists() or \
                    ffe_path.stat().st_mtime < wav_path.stat().st_mtime:
                extract_features(wav_path, ffe_path, arvoc_bin)
            feats = ffe_read(ffe_path.read_bytes())
            if len(feats) == 0:
                continue
            audio = wav_read_pcm16(wav_path.read_bytes()).astype(np.float32)
            feats, periods = prepare_features(feats)
            n = len(feats) * FRAME
            self.utterances.append(Utterance(wav_path.stem, feats, periods,
                                             audio[:n]))
        if not self.utterances:
            raise ValueError(f"no usable WAV files in {wav_dir}")

    def sample(self, rng: np.random.Generator, batch: int, seq_frames: int):
        """Random aligned crops: (feats, periods, target) tensors with
        shapes (B, L, 20), (B, L), (B, L*160)."""
        usable = [u for u in self.utterances if len(u.feats) >= seq_frames]
        if not usable:
            raise ValueError(f"no utterance has {seq_frames} frames")
        feats = np.empty((batch, seq_frames, 20), np.float32)
        periods = np.empty((batch, seq_frames), np.int64)
        target = np.empty((batch, seq_frames * FRAME), np.float32)
        for i in range(batch):
            u = usable[rng.integers(len(usable))]
            f0 = int(rng.integers(len(u.feats) - seq_frames + 1))
            feats[i] = u.feats[f0:f0 + seq_frames]
            periods[i] = u.periods[f0:f0 + seq_frames]
            target[i] = u.audio[f0 * FRAME:(f0 + seq_frames) * FRAME]
        return (torch.from_numpy(feats), torch.from_numpy(periods),
                torch.from_numpy(target))
