"""arvoc: a very-low-complexity autoregressive neural vocoder.

Synthesizes 16 kHz speech from 20-dim acoustic features at a 10 ms frame
rate, four 2.5 ms subframes at a time, with pitch-prediction feedback and
8-bit quantized inference.
"""

from .dsp import SAMPLE_RATE, deemphasis, preemphasis, stft_mag, wav_read, wav_write
from .engine import (SynthStream, bench, copy_synthesis, create_stream,
                     synthesize, synthesize_frame)
from .features import Analyzer, FeatureFrame, analyze, ffe_read, ffe_write
from .model import (Model, ModelConfig, count_flops, count_params, load_model,
                    quantize_model, random_model, save_model)

__version__ = "0.1.0"
