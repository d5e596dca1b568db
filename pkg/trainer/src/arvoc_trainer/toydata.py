"""Synthetic speech-like audio for desk-scale smoke training."""

from pathlib import Path

import numpy as np

from .container import wav_write_pcm16


def speechlike(seconds=2.0, f0=120.0, seed=0, level=0.3) -> np.ndarray:
    """Harmonic stack with vibrato, syllabic amplitude modulation, and a
    little noise; voiced throughout so pitch features stay meaningful."""
    rng = np.random.default_rng(seed)
    n = int(seconds * 16000)
    t = np.arange(n) / 16000.0
    f0_track = f0 * (1.0 + 0.05 * np.sin(2 * np.pi * 0.9 * t)
                     + 0.02 * np.sin(2 * np.pi * 2.3 * t + 1.0))
    phase = 2 * np.pi * np.cumsum(f0_track) / 16000.0
    sig = np.zeros(n)
    for k in range(1, 10):
        sig += np.sin(k * phase + 0.5 * k * k) / k
    env = 0.55 + 0.45 * np.sin(2 * np.pi * 2.1 * t + 0.3) ** 2
    sig = sig * env + 0.015 * rng.standard_normal(n)
    return (level * sig / np.max(np.abs(sig))).astype(np.float64)


def make_toy_dataset(out_dir, n_files=3, seconds=2.0, seed=0) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n_files):
        f0 = 100.0 + 35.0 * i
        x = speechlike(seconds=seconds, f0=f0, seed=seed + i)
        p = out_dir / f"toy_{i}.wav"
        p.write_bytes(wav_write_pcm16(x))
        paths.append(p)
    return paths
