#!/usr/bin/env python3
"""Generate a small synthetic speech-like WAV corpus for smoke training."""

import argparse

from arvoc_trainer.toydata import make_toy_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("--files", type=int, default=3)
    ap.add_argument("--seconds", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    paths = make_toy_dataset(args.out_dir, n_files=args.files,
                             seconds=args.seconds, seed=args.seed)
    for p in paths:
        print(p)


if __name__ == "__main__":
    main()
