"""Synthetic test signals shared across test modules."""

import numpy as np


def voiced_signal(seconds=1.0, f0=120.0, seed=0, level=0.3):
    """Synthetic voiced utterance: harmonic stack with vibrato, a soft
    envelope, and a trace of noise."""
    rng = np.random.default_rng(seed)
    n = int(seconds * 16000)
    t = np.arange(n) / 16000.0
    f0_track = f0 * (1.0 + 0.03 * np.sin(2 * np.pi * 0.8 * t))
    phase = 2 * np.pi * np.cumsum(f0_track) / 16000.0
    sig = np.zeros(n)
    for k in range(1, 9):
        sig += np.sin(k * phase + 0.7 * k) / k
    env = 0.6 + 0.4 * np.sin(2 * np.pi * 1.3 * t) ** 2
    sig = sig * env + 0.02 * rng.standard_normal(n)
    return level * sig / np.max(np.abs(sig))


def periodic_signal(period, seconds=1.0, seed=0, level=0.4):
    """Exactly period-periodic band-limited pulse train (period in samples)."""
    rng = np.random.default_rng(seed)
    n = int(seconds * 16000)
    one = rng.standard_normal(period)
    # band-limit a random cycle so harmonics are well-behaved
    spec = np.fft.rfft(one)
    spec[int(len(spec) * 0.7):] = 0
    one = np.fft.irfft(spec, period)
    sig = np.tile(one, n // period + 1)[:n]
    return level * sig / np.max(np.abs(sig))
