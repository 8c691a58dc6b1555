"""Synthetic corpus generation with known ground-truth statistics.

Stands in for real two-speaker recordings at desk scale: each utterance
gets a log-F0 contour built from short-, mid- and long-period sinusoids
plus white noise, an alternating voiced/unvoiced run structure, and
MCEP/AP matrices with speaker-dependent means. Everything is driven by an
explicit RNG, so a seed pins the corpus bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import UtteranceFeatures

# (period_lo_ms, period_hi_ms, relative amplitude); long periods dominate,
# the way sentence-level movement dominates real intonation.
INTONATION_BANDS = (
    (25.0, 80.0, 0.08),
    (200.0, 800.0, 0.45),
    (1200.0, 2500.0, 0.88),
)


@dataclass(frozen=True)
class SpeakerSynthSpec:
    logf0_mean: float
    logf0_std: float
    mcep_shift: float
    voiced_run_mean: float = 40.0
    unvoiced_run_mean: float = 10.0

    def __post_init__(self):
        if self.logf0_std <= 0:
            raise ValueError("degenerate spec: logf0_std must be positive")
        if self.voiced_run_mean < 1 or self.unvoiced_run_mean < 1:
            raise ValueError("run-length means must be at least one frame")

    @property
    def expected_voiced_fraction(self) -> float:
        return self.voiced_run_mean / (self.voiced_run_mean + self.unvoiced_run_mean)


@dataclass(frozen=True)
class SynthSpec:
    speaker_x: SpeakerSynthSpec
    speaker_y: SpeakerSynthSpec
    n_utterances: int = 40
    frames_min: int = 400
    frames_max: int = 800
    d_mcep: int = 24
    d_ap: int = 1
    frame_period_ms: float = 5.0
    sample_rate_hz: int = 16000
    noise_rel: float = 0.15
    mcep_noise_std: float = 0.25

    def __post_init__(self):
        if self.n_utterances < 1:
            raise ValueError("need at least one utterance")
        if not 1 <= self.frames_min <= self.frames_max:
            raise ValueError("bad frame range")
        if self.d_mcep < 1 or self.d_ap < 0:
            raise ValueError("bad feature dimensions")


def default_synth_spec() -> SynthSpec:
    return SynthSpec(
        speaker_x=SpeakerSynthSpec(logf0_mean=4.70, logf0_std=0.16, mcep_shift=-0.5),
        speaker_y=SpeakerSynthSpec(logf0_mean=5.20, logf0_std=0.18, mcep_shift=0.5),
    )


def _intonation_contour(rng, n_frames, frame_period_ms, logf0_std, noise_rel):
    """Zero-mean contour whose per-frame marginal std is logf0_std."""
    sin_var = sum(amp * amp for _, _, amp in INTONATION_BANDS) / 2.0
    scale = logf0_std / math.sqrt(sin_var + noise_rel * noise_rel)
    t = np.arange(n_frames, dtype=np.float64) * frame_period_ms
    contour = np.zeros(n_frames)
    for lo, hi, amp in INTONATION_BANDS:
        period = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        phase = rng.uniform(0.0, 2.0 * math.pi)
        contour += amp * scale * np.sin(2.0 * math.pi * t / period + phase)
    contour += noise_rel * scale * rng.standard_normal(n_frames)
    return contour


def _voicing_runs(rng, n_frames, voiced_mean, unvoiced_mean):
    mask = np.zeros(n_frames, dtype=bool)
    pos, voiced = 0, True  # start voiced so every utterance has voiced frames
    while pos < n_frames:
        mean = voiced_mean if voiced else unvoiced_mean
        run = int(rng.geometric(1.0 / mean))
        mask[pos : pos + run] = voiced
        pos += run
        voiced = not voiced
    return mask


def _mcep_mean(shift, d_mcep):
    d = np.arange(d_mcep, dtype=np.float64)
    return shift / (1.0 + d)


def make_utterance(speaker: SpeakerSynthSpec, spec: SynthSpec, rng) -> UtteranceFeatures:
    n = int(rng.integers(spec.frames_min, spec.frames_max + 1))
    contour = _intonation_contour(
        rng, n, spec.frame_period_ms, speaker.logf0_std, spec.noise_rel
    )
    mask = _voicing_runs(rng, n, speaker.voiced_run_mean, speaker.unvoiced_run_mean)
    f0 = np.exp(speaker.logf0_mean + contour)
    f0[~mask] = 0.0
    mcep = _mcep_mean(speaker.mcep_shift, spec.d_mcep) + spec.mcep_noise_std * rng.standard_normal(
        (n, spec.d_mcep)
    )
    ap = rng.uniform(0.0, 1.0, (n, spec.d_ap))
    return UtteranceFeatures(
        frame_period_ms=spec.frame_period_ms,
        sample_rate_hz=spec.sample_rate_hz,
        f0=f0,
        mcep=mcep,
        ap=ap,
    )


def make_utterances(speaker: SpeakerSynthSpec, spec: SynthSpec, n: int, rng):
    return [make_utterance(speaker, spec, rng) for _ in range(n)]
