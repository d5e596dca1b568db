from pathlib import Path

import numpy as np
import pytest

from arvoc import dsp, engine as E, features as F, model as M
from arvoc.subframe import NumericError

from helpers import voiced_signal

FIXTURE_TRAINED = Path(__file__).parent / "fixtures" / "trained_mini.frgn"


def feats(n=20, seed=0):
    return E.bench_features(n, seed=seed)


def test_reset_equals_fresh_create(tiny_model):
    frames = feats()
    s1 = E.create_stream(tiny_model)
    for f in frames[:5]:
        E.synthesize_frame(s1, f)
    s1.reset()
    out1 = np.concatenate([E.synthesize_frame(s1, f) for f in frames])
    s2 = E.create_stream(tiny_model)
    out2 = np.concatenate([E.synthesize_frame(s2, f) for f in frames])
    assert np.array_equal(out1, out2)


def test_two_streams_do_not_interfere(tiny_model):
    fa, fb = feats(12, seed=1), feats(12, seed=2)
    sa, sb = E.create_stream(tiny_model), E.create_stream(tiny_model)
    inter_a, inter_b = [], []
    for x, y in zip(fa, fb):
        inter_a.append(E.synthesize_frame(sa, x))
        inter_b.append(E.synthesize_frame(sb, y))
    solo_a = E.synthesize(tiny_model, fa)
    solo_b = E.synthesize(tiny_model, fb)
    assert np.array_equal(np.concatenate(inter_a), solo_a)
    assert np.array_equal(np.concatenate(inter_b), solo_b)


def test_reset_mid_stream_discards_history(tiny_model):
    frames = feats(16, seed=3)
    s = E.create_stream(tiny_model)
    for f in frames[:8]:
        E.synthesize_frame(s, f)
    s.reset()
    tail = np.concatenate([E.synthesize_frame(s, f) for f in frames[8:]])
    fresh = E.synthesize(tiny_model, frames[8:])
    assert np.array_equal(tail, fresh)


def test_sample_count(tiny_model):
    frames = feats(7)
    out = E.synthesize(tiny_model, frames)
    assert out.shape == (7 * 160,)
    assert E.synthesize(tiny_model, feats(100)).shape == (16000,)


def test_frame_by_frame_equals_batch(tiny_model):
    frames = feats(25, seed=4)
    s = E.create_stream(tiny_model)
    steps = np.concatenate([E.synthesize_frame(s, f) for f in frames])
    assert np.array_equal(steps, E.synthesize(tiny_model, frames))


def test_output_is_bounded(tiny_model):
    out = E.synthesize(tiny_model, feats(50, seed=5))
    assert np.all(np.abs(out) < 1.0)


def test_soft_clip_shape():
    x = np.array([0.5, 0.98, 1.5, -2.0, 10.0])
    y = E.soft_clip(x)
    assert y[0] == 0.5 and y[1] == 0.98
    assert 0.98 < y[2] < 1.0
    assert -1.0 < y[3] < -0.98
    assert y[4] < 1.0


def test_copy_synthesis_deterministic(tiny_model):
    wav = dsp.wav_write(voiced_signal(seconds=0.5))
    out1 = E.copy_synthesis(tiny_model, wav)
    out2 = E.copy_synthesis(tiny_model, wav)
    assert out1 == out2
    audio = dsp.wav_read(out1)
    assert audio.size == len(F.analyze(dsp.wav_read(wav))) * 160


def test_poisoned_stream_raises(tiny_model):
    bad = M.Model(tiny_model.config,
                  {k: M.TensorRecord(k, v.data.copy()) for k, v in tiny_model.tensors.items()},
                  "float")
    bad.tensors["sub.gain.b"].data[:] = 1000.0  # exp overflow
    s = E.create_stream(bad)
    with pytest.raises(NumericError):
        E.synthesize_frame(s, feats(1)[0])
    assert s.poisoned
    with pytest.raises(NumericError):
        E.synthesize_frame(s, feats(1)[0])
    s.reset()
    assert not s.poisoned


def test_learned_table_embedding_is_used():
    cfg = M.ModelConfig(cond_hidden=32, cond_sub_dim=16, sub_hidden=48,
                        sub_layers=2, embedding_kind="learned-table")
    m = M.random_model(cfg, seed=30, weight_scale=2.0, feedback_scale=0.25)
    frames = feats(6, seed=31)
    base = E.synthesize(m, frames)
    # changing only the table must change the synthesis
    m.tensors["embed.table"].data[:] += 0.5
    assert not np.array_equal(E.synthesize(m, frames), base)


def test_bench_reports_consistent_fields(tiny_model):
    rep = E.bench(tiny_model, seconds=0.5)
    assert rep.rtf > 0
    assert rep.samples_per_sec == pytest.approx(16000.0 / rep.rtf)
    assert rep.audio_seconds == pytest.approx(0.5)
    assert rep.flops_nominal == M.count_flops(tiny_model.config).total


def test_int8_rtf_is_same_order_as_float(default_model):
    # both paths run the same BLAS here; int8 adds per-layer activation
    # quantization, so it can be moderately slower, never categorically so
    rf = min(E.bench(default_model, seconds=2.0).rtf for _ in range(2))
    rq = min(E.bench(M.quantize_model(default_model), seconds=2.0).rtf
             for _ in range(2))
    assert rq <= 2.0 * rf


@pytest.mark.skipif(not FIXTURE_TRAINED.exists(),
                    reason="needs a trained fixture model")
def test_trained_model_silence_in_near_silence_out():
    m = M.load_model(FIXTURE_TRAINED.read_bytes())
    wav = dsp.wav_write(np.zeros(8000))
    out = dsp.wav_read(E.copy_synthesis(m, wav))
    rms = np.sqrt(np.mean(out ** 2) + 1e-20)
    assert 20 * np.log10(rms + 1e-10) < -50.0


@pytest.mark.skipif(not FIXTURE_TRAINED.exists(),
                    reason="needs a trained fixture model")
def test_trained_model_pitch_track_agreement():
    m = M.load_model(FIXTURE_TRAINED.read_bytes())
    x = voiced_signal(seconds=1.5, f0=130.0, seed=9)
    y = dsp.wav_read(E.copy_synthesis(m, dsp.wav_write(x)))
    fx = F.analyze(x)
    fy = F.analyze(y[:len(x)])
    voiced = [(a, b) for a, b in zip(fx, fy) if a.voicing > 0.6 and b.voicing > 0.6]
    agree = sum(abs(a.pitch_period - b.pitch_period) <= 1.0 for a, b in voiced)
    assert voiced and agree >= 0.9 * len(voiced)
