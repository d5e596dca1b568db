#!/usr/bin/env python3
"""Write a randomly initialized .frgn model, optionally int8.

Useful for benchmarking and engine tests before any training has run.
"""

import argparse
from pathlib import Path

from arvoc.model import (SMALL_CONFIG, ModelConfig, quantize_model,
                         random_model, save_model)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="output .frgn path")
    ap.add_argument("--preset", choices=["default", "small"], default="default")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--weight-scale", type=float, default=2.0)
    ap.add_argument("--feedback-scale", type=float, default=0.25)
    ap.add_argument("--int8", action="store_true")
    args = ap.parse_args()

    cfg = ModelConfig() if args.preset == "default" else SMALL_CONFIG
    m = random_model(cfg, seed=args.seed, weight_scale=args.weight_scale,
                     feedback_scale=args.feedback_scale)
    if args.int8:
        m = quantize_model(m)
    blob = save_model(m)
    Path(args.out).write_bytes(blob)
    print(f"{args.out}: {len(blob)} bytes ({m.precision})")


if __name__ == "__main__":
    main()
