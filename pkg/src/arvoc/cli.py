"""Command-line front end.

Exit codes: 0 ok, 1 usage error, 2 format/IO error, 3 numeric failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dsp, engine, features, model as model_mod
from .subframe import NumericError


class _UsageExit(SystemExit):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit(1)


def _load_model(path: str) -> model_mod.Model:
    return model_mod.load_model(Path(path).read_bytes())


def _cmd_analyze(args) -> int:
    signal = dsp.wav_read(Path(args.wav_in).read_bytes())
    frames = features.analyze(signal)
    Path(args.ffe_out).write_bytes(features.ffe_write(frames))
    print(f"{args.ffe_out}: {len(frames)} frames")
    return 0


def _cmd_synthesize(args) -> int:
    m = _load_model(args.model)
    frames = features.ffe_read(Path(args.ffe_in).read_bytes())
    audio = engine.synthesize(m, frames)
    if args.raw:
        # Raw little-endian float32 samples, for harnesses that need the
        # synthesis output without PCM16 quantization.
        Path(args.out).write_bytes(audio.astype("<f4").tobytes())
    else:
        Path(args.out).write_bytes(dsp.wav_write(audio))
    print(f"{args.out}: {audio.size} samples")
    return 0


def _cmd_copysynth(args) -> int:
    m = _load_model(args.model)
    Path(args.wav_out).write_bytes(
        engine.copy_synthesis(m, Path(args.wav_in).read_bytes()))
    print(f"{args.wav_out}: ok")
    return 0


def _cmd_bench(args) -> int:
    m = _load_model(args.model)
    if args.float and m.precision == "int8":
        m = model_mod.dequantize_model(m)
    report = engine.bench(m, seconds=args.seconds)
    print(f"precision: {m.precision}")
    print(f"audio: {report.audio_seconds:.2f} s, compute: {report.wall_seconds:.3f} s")
    print(f"rtf: {report.rtf:.4f}")
    print(f"samples/s: {report.samples_per_sec:.0f}")
    print(f"nominal complexity: {report.flops_nominal / 1e9:.3f} GFLOPS")
    return 0


def _cmd_quantize(args) -> int:
    m = _load_model(args.model_in)
    Path(args.model_out).write_bytes(
        model_mod.save_model(model_mod.quantize_model(m)))
    print(f"{args.model_out}: ok")
    return 0


def _cmd_inspect(args) -> int:
    data = Path(args.model).read_bytes()
    m = model_mod.load_model(data)
    cfg = m.config
    flops = model_mod.count_flops(cfg)
    print(f"precision: {m.precision}")
    print(f"embedding: {cfg.embedding_kind}")
    print(f"cond_hidden: {cfg.cond_hidden}  cond_sub_dim: {cfg.cond_sub_dim}")
    print(f"sub_hidden: {cfg.sub_hidden}  sub_layers: {cfg.sub_layers}")
    print(f"parameters: {model_mod.count_params(cfg)}")
    print(f"complexity: {flops.total / 1e9:.3f} GFLOPS "
          f"(cond {flops.cond_per_sec / 1e6:.1f} M, "
          f"subframe {flops.subframe_per_sec / 1e6:.1f} M)")
    print(f"container: {len(data)} bytes")
    print(f"tensors: {len(m.tensors)}")
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="arvoc", description="Low-complexity neural vocoder")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="WAV to .ffe features")
    a.add_argument("wav_in")
    a.add_argument("ffe_out")
    a.set_defaults(fn=_cmd_analyze)

    s = sub.add_parser("synthesize", help=".ffe features to WAV")
    s.add_argument("model")
    s.add_argument("ffe_in")
    s.add_argument("out")
    s.add_argument("--raw", action="store_true",
                   help="write raw float32 samples instead of WAV")
    s.set_defaults(fn=_cmd_synthesize)

    c = sub.add_parser("copysynth", help="analyze then resynthesize a WAV")
    c.add_argument("model")
    c.add_argument("wav_in")
    c.add_argument("wav_out")
    c.set_defaults(fn=_cmd_copysynth)

    b = sub.add_parser("bench", help="measure the real-time factor")
    b.add_argument("model")
    b.add_argument("--seconds", type=float, default=30.0)
    b.add_argument("--float", action="store_true",
                   help="bench the float path of an int8 model")
    b.set_defaults(fn=_cmd_bench)

    q = sub.add_parser("quantize", help="float container to int8")
    q.add_argument("model_in")
    q.add_argument("model_out")
    q.set_defaults(fn=_cmd_quantize)

    i = sub.add_parser("inspect", help="print config, cost and size")
    i.add_argument("model")
    i.set_defaults(fn=_cmd_inspect)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit:
        return 1
    try:
        return args.fn(args)
    except (dsp.WavFormatError, features.FfeError,
            model_mod.ContainerError) as exc:
        print(f"arvoc: format error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"arvoc: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError) as exc:
        print(f"arvoc: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
