"""Signal primitives shared by analysis, synthesis, and training export.

All signals are mono 16 kHz float arrays with amplitudes in [-1, 1).
Emphasis filters run in float64 internally so that long streams do not
drift, and both are streaming-composable: processing a signal in chunks
with a carried state is bit-identical to one-shot processing.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

SAMPLE_RATE = 16000
DEEMPH_ALPHA = 0.85

# Window sizes accepted by stft_mag (0.5x .. 160 ms at 16 kHz, all /4 hops).
STFT_SIZES = (64, 80, 128, 160, 256, 320, 512, 640, 1024, 1280, 2048, 2560)


class WavFormatError(ValueError):
    """Raised for WAV input that is not PCM16 mono 16 kHz."""


@dataclass
class EmphasisState:
    """One-sample memory of a first-order emphasis filter."""

    mem: float = 0.0


def _check_signal(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected 1-d signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite samples")
    return x


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    return alpha


def preemphasis(x: np.ndarray, alpha: float = DEEMPH_ALPHA,
                state: EmphasisState | None = None) -> np.ndarray:
    """First-order high-tilt filter y(n) = x(n) - alpha*x(n-1).

    `state` carries the last input sample across calls; pass None for
    one-shot use.
    """
    x = _check_signal(x)
    alpha = _check_alpha(alpha)
    if state is None:
        state = EmphasisState()
    if x.size == 0:
        return x
    prev = np.concatenate(([state.mem], x[:-1]))
    y = x - alpha * prev
    state.mem = float(x[-1])
    return y


def deemphasis(x: np.ndarray, alpha: float = DEEMPH_ALPHA,
               state: EmphasisState | None = None) -> np.ndarray:
    """First-order IIR 1/(1 - alpha*z^-1), inverse of `preemphasis`.

    `state` carries the last output sample across calls.
    """
    x = _check_signal(x)
    alpha = _check_alpha(alpha)
    if state is None:
        state = EmphasisState()
    if x.size == 0:
        return x
    y, _ = lfilter([1.0], [1.0, -alpha], x, zi=[alpha * state.mem])
    state.mem = float(y[-1])
    return y


def stft_mag(x: np.ndarray, window_size: int) -> np.ndarray:
    """One-sided STFT magnitudes with a periodic Hann window and L/4 hop.

    Returns an array of shape (frames, window_size//2 + 1); frames are
    taken without padding, so frame t covers samples [t*hop, t*hop+L).
    """
    x = _check_signal(x)
    if window_size not in STFT_SIZES:
        raise ValueError(f"unsupported window size {window_size}")
    if x.size < window_size:
        raise ValueError(
            f"signal of {x.size} samples is shorter than window {window_size}")
    hop = window_size // 4
    window = hann_periodic(window_size)
    n_frames = 1 + (x.size - window_size) // hop
    idx = hop * np.arange(n_frames)[:, None] + np.arange(window_size)[None, :]
    return np.abs(np.fft.rfft(x[idx] * window, axis=-1))


def hann_periodic(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def wav_read(data: bytes) -> np.ndarray:
    """Decode a RIFF/WAVE blob; accepts only PCM16 mono 16 kHz.

    Samples are scaled to [-1, 1) by 1/32768.
    """
    import io
    import wave

    try:
        with wave.open(io.BytesIO(data), "rb") as w:
            channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            comp = w.getcomptype()
            frames = w.readframes(w.getnframes())
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"not a readable WAVE file: {exc}") from exc
    if comp != "NONE":
        raise WavFormatError(f"compressed WAVE ({comp}) is not supported")
    if channels != 1:
        raise WavFormatError(f"expected mono audio, got {channels} channels")
    if width != 2:
        raise WavFormatError(f"expected 16-bit PCM, got {8 * width}-bit")
    if rate != SAMPLE_RATE:
        raise WavFormatError(f"expected {SAMPLE_RATE} Hz, got {rate} Hz")
    pcm = np.frombuffer(frames, dtype="<i2")
    return pcm.astype(np.float64) / 32768.0


def wav_write(x: np.ndarray) -> bytes:
    """Encode samples as PCM16 mono 16 kHz WAVE with saturating round."""
    import io
    import wave

    x = _check_signal(x)
    pcm = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(SAMPLE_RATE)
        w.writeframes(pcm.tobytes())
    return buf.getvalue()
