"""Non-parallel voice-conversion feature toolkit.

Converts spectral (MCEP) and prosodic (wavelet-decomposed F0) features
between two speakers with two independently trained CycleGANs. The package
works on frame-synchronous feature files; waveform analysis/synthesis is an
external vocoder's job.
"""

__version__ = "0.1.0"

from .features import UtteranceFeatures, read_features, write_features, validate
from .f0 import SpeakerF0Stats, interpolate_unvoiced, to_log, lg_convert
from .cwt import CwtMatrix, ScaleStats, decompose10, recompose10

__all__ = [
    "UtteranceFeatures",
    "read_features",
    "write_features",
    "validate",
    "SpeakerF0Stats",
    "interpolate_unvoiced",
    "to_log",
    "lg_convert",
    "CwtMatrix",
    "ScaleStats",
    "decompose10",
    "recompose10",
]
