"""Training CLI: key=value config file in, .frgn + curve CSV out."""

import argparse
import sys
from pathlib import Path

from .config import GenConfig, TrainSchedule, parse_config_file
from .data import SpeechDataset
from .discriminator import make_bank
from .generator import Generator
from .train import (adversarial_train, export_model, load_checkpoint,
                    pretrain, save_checkpoint)


def _load_cfg(path):
    if path is None:
        return GenConfig(), TrainSchedule()
    return parse_config_file(path)


def _cmd_pretrain(args) -> int:
    config, schedule = _load_cfg(args.config)
    dataset = SpeechDataset(args.data_dir, arvoc_bin=args.arvoc_bin)
    gen = Generator(config, seed=schedule.seed)
    if args.init:
        gen = load_checkpoint(args.init)
    rows = pretrain(gen, dataset, schedule, out_dir=args.out_dir,
                    updates=args.updates)
    print(f"pretrain: {rows[-1][0] + 1} updates, "
          f"spectral {rows[0][1]:.1f} -> {rows[-1][1]:.1f}")
    print(f"wrote {Path(args.out_dir) / 'pretrain.frgn'}")
    return 0


def _cmd_adversarial(args) -> int:
    config, schedule = _load_cfg(args.config)
    gen = load_checkpoint(args.init)
    dataset = SpeechDataset(args.data_dir, arvoc_bin=args.arvoc_bin)
    bank = make_bank(seed=schedule.seed)
    rows = adversarial_train(gen, bank, dataset, schedule,
                             out_dir=args.out_dir, steps=args.steps,
                             disc_lr=args.disc_lr)
    print(f"adversarial: {rows[-1][0] + 1} steps, "
          f"spectral {rows[-1][1]:.1f}, disc {rows[-1][4]:.3f}")
    print(f"wrote {Path(args.out_dir) / 'adversarial.frgn'}")
    return 0


def _cmd_export(args) -> int:
    gen = load_checkpoint(args.checkpoint)
    Path(args.out).write_bytes(export_model(gen))
    print(f"{args.out}: ok")
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="arvoc-train",
                                description="Vocoder training harness")
    sub = p.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("pretrain", help="spectral-loss pretraining")
    pre.add_argument("data_dir", help="folder of 16 kHz mono WAVs")
    pre.add_argument("out_dir")
    pre.add_argument("--config", help="key=value config file")
    pre.add_argument("--init", help="checkpoint to continue from")
    pre.add_argument("--updates", type=int, help="override update count")
    pre.add_argument("--arvoc-bin", default="arvoc")
    pre.set_defaults(fn=_cmd_pretrain)

    adv = sub.add_parser("adversarial", help="GAN fine-tuning")
    adv.add_argument("data_dir")
    adv.add_argument("out_dir")
    adv.add_argument("--init", required=True, help="pretrained checkpoint")
    adv.add_argument("--config")
    adv.add_argument("--steps", type=int)
    adv.add_argument("--disc-lr", type=float)
    adv.add_argument("--arvoc-bin", default="arvoc")
    adv.set_defaults(fn=_cmd_adversarial)

    exp = sub.add_parser("export", help="checkpoint to .frgn container")
    exp.add_argument("checkpoint")
    exp.add_argument("out")
    exp.set_defaults(fn=_cmd_export)

    args = p.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
