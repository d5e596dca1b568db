"""Acoustic feature extraction: 20 features per 10 ms frame.

Each frame carries 18 Bark-spaced cepstral coefficients (computed on the
pre-emphasized signal), a pitch period in samples, and a voicing value in
[0, 1]. The pitch period is stored raw (32..320 samples); it is mapped to
a normalized value and a 12-dimensional sinusoidal embedding only when the
conditioning input vector is assembled.

Feature files (".ffe") are headerless little-endian float32, 20 values per
frame, frames concatenated.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

from .dsp import DEEMPH_ALPHA, hann_periodic

FRAME_SIZE = 160            # 10 ms at 16 kHz
ANALYSIS_WINDOW = 320       # 20 ms BFCC window centered on the frame
NUM_BANDS = 18
NUM_FEATURES = 20
EMBED_DIM = 12
PITCH_MIN = 32              # 500 Hz
PITCH_MAX = 320             # 50 Hz
PITCH_DEFAULT = 160.0
PITCH_LOOKBACK = 720        # raw samples required behind the frame end
CORR_LEN = 320              # correlation segment for the pitch tracker
ENERGY_FLOOR = 1e-10

_OCTAVE_COST = 0.02         # per-octave bias toward shorter periods
_TRANS_COST = 0.1           # per-octave cost of inter-frame pitch jumps
_VOICED_THRESHOLD = 0.3

# 18 triangular bands over 0..8 kHz: edges linear below 1 kHz, logarithmic
# above, 20 edge points in total.
BAND_EDGES_HZ = np.concatenate([
    np.linspace(0.0, 1000.0, 9),
    1000.0 * (8000.0 / 1000.0) ** (np.arange(1, 12) / 11.0),
])


def _band_weights() -> np.ndarray:
    bins = ANALYSIS_WINDOW // 2 + 1
    freqs = np.arange(bins) * (16000.0 / ANALYSIS_WINDOW)
    w = np.zeros((NUM_BANDS, bins))
    for b in range(NUM_BANDS):
        lo, mid, hi = BAND_EDGES_HZ[b], BAND_EDGES_HZ[b + 1], BAND_EDGES_HZ[b + 2]
        rising = (freqs - lo) / (mid - lo)
        falling = (hi - freqs) / (hi - mid)
        w[b] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return w


_BAND_WEIGHTS = _band_weights()
_BFCC_WINDOW = hann_periodic(ANALYSIS_WINDOW)

_LAGS = np.arange(PITCH_MIN, PITCH_MAX + 1)
_LAG_LOG2 = np.log2(_LAGS / PITCH_MIN)
# _TRANS_MATRIX[i, j]: cost of moving from previous lag j to current lag i.
_TRANS_MATRIX = _TRANS_COST * np.abs(_LAG_LOG2[:, None] - _LAG_LOG2[None, :])


@dataclass
class FeatureFrame:
    """One 10 ms frame: 18 BFCC + pitch period (samples) + voicing."""

    bfcc: np.ndarray
    pitch_period: float
    voicing: float

    def vector(self) -> np.ndarray:
        """Raw 20-dim feature vector as stored in .ffe files."""
        v = np.empty(NUM_FEATURES, dtype=np.float32)
        v[:NUM_BANDS] = self.bfcc
        v[NUM_BANDS] = self.pitch_period
        v[NUM_BANDS + 1] = self.voicing
        return v

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "FeatureFrame":
        v = np.asarray(v, dtype=np.float32)
        if v.shape != (NUM_FEATURES,):
            raise ValueError(f"expected {NUM_FEATURES} features, got {v.shape}")
        return cls(bfcc=v[:NUM_BANDS].copy(),
                   pitch_period=float(v[NUM_BANDS]),
                   voicing=float(v[NUM_BANDS + 1]))


def compute_bfcc(window: np.ndarray) -> np.ndarray:
    """18 Bark-band cepstral coefficients of one pre-emphasized window.

    Log10 band energies (floored at 1e-10) followed by an orthonormal
    DCT-II. Never returns NaN, even for digital silence.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (ANALYSIS_WINDOW,):
        raise ValueError(f"expected {ANALYSIS_WINDOW}-sample window, got {window.shape}")
    mag2 = np.abs(np.fft.rfft(window * _BFCC_WINDOW)) ** 2
    energies = np.maximum(_BAND_WEIGHTS @ mag2, ENERGY_FLOOR)
    return dct(np.log10(energies), type=2, norm="ortho")


def normalized_period(period: float) -> float:
    """Map a pitch period in [32, 320] to [0, 1] on a log2 scale."""
    p = min(max(float(period), PITCH_MIN), PITCH_MAX)
    return np.log2(p / PITCH_MIN) / np.log2(PITCH_MAX / PITCH_MIN)


def pitch_embedding(period: float) -> np.ndarray:
    """Fixed sinusoidal 12-dim embedding of the pitch period.

    Components are sin(2*pi*k*phi) for k=1..6 followed by the matching
    cosines, with phi the log2-normalized period. Out-of-range periods are
    clamped with a warning.
    """
    p = float(period)
    if not PITCH_MIN <= p <= PITCH_MAX:
        warnings.warn(f"pitch period {p} outside [{PITCH_MIN}, {PITCH_MAX}], clamping")
    phi = normalized_period(p)
    k = np.arange(1, EMBED_DIM // 2 + 1)
    return np.concatenate([np.sin(2 * np.pi * k * phi), np.cos(2 * np.pi * k * phi)])


def conditioning_input(frame: FeatureFrame) -> np.ndarray:
    """32-dim network input: BFCC, normalized period, voicing, embedding."""
    v = np.empty(NUM_FEATURES + EMBED_DIM, dtype=np.float32)
    v[:NUM_BANDS] = frame.bfcc
    v[NUM_BANDS] = normalized_period(frame.pitch_period)
    v[NUM_BANDS + 1] = frame.voicing
    v[NUM_FEATURES:] = pitch_embedding(frame.pitch_period)
    return v


class PitchTracker:
    """Normalized-autocorrelation pitch tracker with causal octave smoothing.

    Carries a cumulative lag-score vector across frames (forward-only
    Viterbi) plus the last voiced period, which is held through unvoiced
    stretches so the embedding stays continuous.
    """

    def __init__(self):
        self._scores = None
        self._period = PITCH_DEFAULT

    def step(self, window: np.ndarray) -> tuple[float, float]:
        window = np.asarray(window, dtype=np.float64)
        if window.size < PITCH_LOOKBACK:
            raise ValueError(f"pitch window must hold >= {PITCH_LOOKBACK} samples")
        corr = self._normalized_corr(window)
        emission = corr - _OCTAVE_COST * _LAG_LOG2
        if self._scores is None:
            scores = emission
        else:
            scores = emission + np.max(self._scores[None, :] - _TRANS_MATRIX, axis=1)
        self._scores = scores - scores.max()
        best = int(np.argmax(scores))
        voicing = float(np.clip(corr[best], 0.0, 1.0))
        if voicing >= _VOICED_THRESHOLD:
            self._period = self._refine(corr, best)
        return self._period, voicing

    @staticmethod
    def _normalized_corr(window: np.ndarray) -> np.ndarray:
        seg = window[-CORR_LEN:]
        e_seg = float(seg @ seg)
        hist = window[-(CORR_LEN + PITCH_MAX):]
        views = np.lib.stride_tricks.sliding_window_view(hist, CORR_LEN)
        # views[PITCH_MAX - T] is the segment lagged by T.
        lagged = views[PITCH_MAX - _LAGS]
        dots = lagged @ seg
        energies = np.einsum("ij,ij->i", lagged, lagged)
        denom = np.sqrt(e_seg * energies)
        valid = denom > 1e-9
        corr = np.zeros(len(_LAGS))
        corr[valid] = dots[valid] / denom[valid]
        return corr

    @staticmethod
    def _refine(corr: np.ndarray, best: int) -> float:
        period = float(_LAGS[best])
        if 0 < best < len(corr) - 1:
            a, b, c = corr[best - 1], corr[best], corr[best + 1]
            denom = a - 2 * b + c
            if denom < -1e-12:
                period += float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))
        return float(np.clip(period, PITCH_MIN, PITCH_MAX))


def estimate_pitch(window: np.ndarray,
                   tracker: PitchTracker | None = None) -> tuple[float, float]:
    """Single-frame pitch estimate; pass a tracker to smooth across frames."""
    if tracker is None:
        tracker = PitchTracker()
    return tracker.step(window)


class Analyzer:
    """Streaming feature extractor; one instance per audio stream.

    `feed` returns the frames that became complete; `flush` zero-pads the
    tail and returns the rest, so feed+flush over arbitrary chunk splits is
    bit-identical to one-shot `analyze`. Frame f needs samples up to
    f*160+240 (5 ms lookahead for the centered BFCC window).
    """

    _KEEP = 1024  # raw history retained behind the newest sample

    def __init__(self):
        self._buf = np.zeros(0)
        self._buf_start = 0   # absolute index of _buf[0]
        self._total = 0
        self._next_frame = 0
        self._tracker = PitchTracker()

    def feed(self, samples: np.ndarray) -> list[FeatureFrame]:
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("expected a 1-d chunk")
        self._buf = np.concatenate([self._buf, samples])
        self._total += samples.size
        out = []
        while True:
            f = self._next_frame
            need = max(f * FRAME_SIZE + ANALYSIS_WINDOW - FRAME_SIZE // 2,
                       ANALYSIS_WINDOW)
            if self._total < need:
                break
            out.append(self._frame(f))
            self._next_frame += 1
        self._trim()
        return out

    def flush(self) -> list[FeatureFrame]:
        if self._total < ANALYSIS_WINDOW:
            return []
        n_frames = self._total // FRAME_SIZE
        pad = n_frames * FRAME_SIZE + ANALYSIS_WINDOW - self._total
        if pad > 0:
            self._buf = np.concatenate([self._buf, np.zeros(pad)])
        out = [self._frame(f) for f in range(self._next_frame, n_frames)]
        self._next_frame = n_frames
        return out

    def _slice(self, start: int, stop: int) -> np.ndarray:
        """Absolute-index slice with zero padding before the stream start."""
        if start >= self._buf_start:
            return self._buf[start - self._buf_start:stop - self._buf_start]
        lead = np.zeros(self._buf_start - start)
        return np.concatenate([lead, self._buf[:stop - self._buf_start]])

    def _frame(self, f: int) -> FeatureFrame:
        center = f * FRAME_SIZE + FRAME_SIZE // 2
        # One extra look-back sample makes per-window pre-emphasis exact.
        seg = self._slice(center - ANALYSIS_WINDOW // 2 - 1,
                          center + ANALYSIS_WINDOW // 2)
        bfcc = compute_bfcc(seg[1:] - DEEMPH_ALPHA * seg[:-1])
        end = (f + 1) * FRAME_SIZE
        period, voicing = self._tracker.step(self._slice(end - PITCH_LOOKBACK, end))
        return FeatureFrame(bfcc=bfcc, pitch_period=period, voicing=voicing)

    def _trim(self):
        cut = self._total - self._KEEP
        if cut > self._buf_start:
            self._buf = self._buf[cut - self._buf_start:]
            self._buf_start = cut


def analyze(x: np.ndarray) -> list[FeatureFrame]:
    """One-shot analysis: one FeatureFrame per 160 samples.

    Inputs shorter than one analysis window yield an empty list.
    """
    a = Analyzer()
    frames = a.feed(x)
    frames.extend(a.flush())
    return frames


class FfeError(ValueError):
    """Raised for malformed .ffe feature files."""


def ffe_write(frames: list[FeatureFrame]) -> bytes:
    if not frames:
        return b""
    return np.stack([f.vector() for f in frames]).astype("<f4").tobytes()


def ffe_read(data: bytes) -> list[FeatureFrame]:
    stride = NUM_FEATURES * 4
    if len(data) % stride != 0:
        raise FfeError(f"length {len(data)} is not a multiple of {stride} bytes")
    flat = np.frombuffer(data, dtype="<f4")
    return [FeatureFrame.from_vector(v) for v in flat.reshape(-1, NUM_FEATURES)]
