#!/usr/bin/env python3
"""End-to-end demo: synthesize a voiced test tone, analyze it, resynthesize
through a model, and report level and pitch agreement."""

import argparse
from pathlib import Path

import numpy as np

from arvoc import dsp, engine, features, model as model_mod


def voiced_tone(seconds=2.0, f0=120.0):
    n = int(seconds * 16000)
    t = np.arange(n) / 16000.0
    phase = 2 * np.pi * f0 * (1 + 0.03 * np.sin(2 * np.pi * t)) * t
    sig = sum(np.sin(k * phase) / k for k in range(1, 8))
    return 0.3 * sig / np.max(np.abs(sig))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("model", help=".frgn model file")
    ap.add_argument("--out", default="demo_out.wav")
    args = ap.parse_args()

    m = model_mod.load_model(Path(args.model).read_bytes())
    x = voiced_tone()
    frames = features.analyze(x)
    y = engine.synthesize(m, frames)
    Path(args.out).write_bytes(dsp.wav_write(y))

    fy = features.analyze(y.astype(np.float64))
    voiced = [(a, b) for a, b in zip(frames, fy)
              if a.voicing > 0.6 and b.voicing > 0.6]
    if voiced:
        agree = np.mean([abs(a.pitch_period - b.pitch_period) <= 1.0
                         for a, b in voiced])
    else:
        agree = float("nan")
    print(f"input:  {len(x)} samples, rms {np.sqrt(np.mean(x ** 2)):.4f}")
    print(f"output: {y.size} samples, rms {np.sqrt(np.mean(y ** 2)):.4f}")
    print(f"voiced frames: {len(voiced)}, pitch agreement (+-1): {agree:.0%}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
