"""Configuration dataclasses and the key=value config file parser.

GenConfig mirrors the engine's model configuration; the field set and
defaults are part of the .frgn container contract.
"""

from dataclasses import dataclass, field, fields
from pathlib import Path


@dataclass(frozen=True)
class GenConfig:
    cond_hidden: int = 256
    cond_sub_dim: int = 128
    sub_hidden: int = 256
    sub_layers: int = 3
    embedding_kind: str = "fixed-sinusoidal"
    subframe_len: int = 40
    frame_subframes: int = 4
    feature_dim: int = 20
    embed_dim: int = 12
    pitch_min: int = 32
    pitch_max: int = 320

    def __post_init__(self):
        if self.embedding_kind not in ("fixed-sinusoidal", "learned-table"):
            raise ValueError(f"unknown embedding kind {self.embedding_kind!r}")
        if (self.subframe_len, self.frame_subframes) != (40, 4):
            raise ValueError("subframe geometry is fixed at 4 x 40")
        if self.feature_dim + self.embed_dim != 32:
            raise ValueError("conditioning input must total 32 dims")


@dataclass(frozen=True)
class SpectralLossConfig:
    windows: tuple[int, ...] = (80, 160, 320, 640, 1280, 2560)
    gamma: float = 0.5
    floor: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")


@dataclass(frozen=True)
class TrainSchedule:
    """Desk-scale defaults; the sequence-length mix and the adversarial
    learning rate and Adam betas are fixed properties of the recipe."""

    pretrain_updates: int = 5000
    pretrain_batch: int = 32
    pretrain_lr: float = 5e-4
    pretrain_seq: int = 15
    pretrain_long_seq: int = 30
    pretrain_long_frac: float = 0.1
    adv_steps: int = 2000
    adv_batch: int = 8
    adv_lr: float = 2e-6
    adv_seq: int = 60
    beta1: float = 0.9
    beta2: float = 0.999
    seed: int = 0

    def __post_init__(self):
        for name in ("pretrain_updates", "pretrain_batch", "pretrain_seq",
                     "pretrain_long_seq", "adv_steps", "adv_batch", "adv_seq"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def parse_config_file(path) -> tuple[GenConfig, TrainSchedule]:
    """key = value lines; '#' starts a comment. Unknown keys are errors."""
    gen_fields = {f.name: f.type for f in fields(GenConfig)}
    sched_fields = {f.name: f.type for f in fields(TrainSchedule)}
    gen_kw, sched_kw = {}, {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in gen_fields:
            gen_kw[key] = value if key == "embedding_kind" else _num(value)
        elif key in sched_fields:
            sched_kw[key] = _num(value)
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return GenConfig(**gen_kw), TrainSchedule(**sched_kw)


def _num(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)
