"""Stream orchestration and the public synthesis API.

A SynthStream owns the per-stream state for one audio stream; the loaded
model is shared read-only between any number of streams. Synthesis is
strictly causal: each frame's output depends only on the current feature
frame and previously synthesized audio.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import dsp
from .condnet import CondNet
from .features import (EMBED_DIM, FRAME_SIZE, NUM_BANDS, NUM_FEATURES,
                       FeatureFrame, analyze, conditioning_input,
                       normalized_period)
from .model import Model, count_flops
from .subframe import NumericError, SubframeNet

SOFT_CLIP_LIMIT = 0.98


def _model_cond_input(model: Model, frame: FeatureFrame) -> np.ndarray:
    """32-dim network input honoring the model's embedding variant."""
    if model.config.embedding_kind != "learned-table":
        return conditioning_input(frame)
    v = np.empty(NUM_FEATURES + EMBED_DIM, dtype=np.float32)
    v[:NUM_BANDS] = frame.bfcc
    v[NUM_BANDS] = normalized_period(frame.pitch_period)
    v[NUM_BANDS + 1] = frame.voicing
    p = min(max(float(frame.pitch_period), float(model.config.pitch_min)),
            float(model.config.pitch_max))
    idx = int(round(p)) - model.config.pitch_min
    v[NUM_FEATURES:] = model.vec("embed.table")[idx]
    return v


def soft_clip(x: np.ndarray, limit: float = SOFT_CLIP_LIMIT) -> np.ndarray:
    """Identity below |limit|, tanh-shaped above, bounded by 1; keeps the
    de-emphasized output inside [-1, 1) ahead of PCM16 writes."""
    y = np.asarray(x, dtype=np.float64).copy()
    a = np.abs(y)
    over = a > limit
    if np.any(over):
        span = 1.0 - limit
        shaped = limit + span * np.tanh((a[over] - limit) / span)
        # strictly below 1 even after float32 rounding
        y[over] = np.sign(y[over]) * np.minimum(shaped, 1.0 - 1e-7)
    return y


class SynthStream:
    """One synthesis stream over a shared model."""

    def __init__(self, model: Model):
        self.model = model
        self._cond = CondNet(model)
        self._sub = SubframeNet(model)
        self.frames = 0
        self.poisoned = False
        self.reset()

    def reset(self) -> None:
        """Back to the deterministic zero start state."""
        self._cond_state = self._cond.init_state()
        self._synth_state = self._sub.init_state()
        self.frames = 0
        self.poisoned = False


def create_stream(model: Model) -> SynthStream:
    return SynthStream(model)


def synthesize_frame(stream: SynthStream, frame: FeatureFrame) -> np.ndarray:
    """160 output samples for one feature frame (final domain, float32)."""
    if stream.poisoned:
        raise NumericError("stream poisoned by an earlier numeric failure")
    x = _model_cond_input(stream.model, frame)
    try:
        latents = stream._cond.forward(stream._cond_state, x)
        conds = [stream._sub.conditioning(lat) for lat in latents]
        out = stream._sub.synth_frame(stream._synth_state, conds, frame.pitch_period)
    except NumericError:
        stream.poisoned = True
        raise
    stream.frames += 1
    return soft_clip(out).astype(np.float32)


def synthesize(model: Model, frames: list[FeatureFrame]) -> np.ndarray:
    """Batch synthesis from a fresh stream; frames * 160 samples."""
    stream = create_stream(model)
    if not frames:
        return np.zeros(0, dtype=np.float32)
    return np.concatenate([synthesize_frame(stream, f) for f in frames])


def copy_synthesis(model: Model, wav_in: bytes) -> bytes:
    """Analyze a WAV and resynthesize it through the model."""
    return dsp.wav_write(synthesize(model, analyze(dsp.wav_read(wav_in))))


def bench_features(n_frames: int, seed: int = 42) -> list[FeatureFrame]:
    """Deterministic voiced-ish pseudo-features for benchmarking."""
    rng = np.random.default_rng(seed)
    walk = rng.normal(0.0, 0.05, size=(n_frames, 18)).cumsum(axis=0)
    walk -= walk.mean(axis=0, keepdims=True)
    frames = []
    for i in range(n_frames):
        period = 120.0 + 60.0 * np.sin(2 * np.pi * i / 150.0)
        bfcc = (walk[i] - 2.0).astype(np.float32)
        frames.append(FeatureFrame(bfcc=bfcc, pitch_period=period, voicing=0.9))
    return frames


@dataclass
class BenchReport:
    rtf: float
    flops_nominal: float
    samples_per_sec: float
    wall_seconds: float
    audio_seconds: float


def bench(model: Model, seconds: float = 5.0) -> BenchReport:
    """Wall-clock timed synthesis of deterministic pseudo-features.

    rtf = compute time / audio time; flops_nominal comes from the static
    counter, not from measurement.
    """
    n_frames = max(1, int(round(seconds * 100)))
    frames = bench_features(n_frames)
    stream = create_stream(model)
    for f in frames[:10]:  # warm up caches and BLAS paths
        synthesize_frame(stream, f)
    stream.reset()
    t0 = time.perf_counter()
    for f in frames:
        synthesize_frame(stream, f)
    wall = time.perf_counter() - t0
    audio = n_frames * FRAME_SIZE / dsp.SAMPLE_RATE
    rtf = wall / audio
    return BenchReport(rtf=rtf,
                       flops_nominal=count_flops(model.config).total,
                       samples_per_sec=dsp.SAMPLE_RATE / rtf,
                       wall_seconds=wall,
                       audio_seconds=audio)
