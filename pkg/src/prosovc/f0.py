"""F0 preprocessing: interpolation over unvoiced gaps, log scale,
speaker-level z-normalization, and the log-Gaussian baseline transform.

All functions are pure and operate on 1-D float64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AllUnvoicedError(ValueError):
    """Contour has no voiced frame, so there is nothing to interpolate."""


class DegenerateStatsError(ValueError):
    """Too few voiced frames or zero variance."""


@dataclass(frozen=True)
class SpeakerF0Stats:
    """Corpus-level mean/std of voiced log-F0 (natural log of Hz)."""

    mean: float
    std: float
    n_voiced: int

    def __post_init__(self):
        if not np.isfinite(self.mean):
            raise DegenerateStatsError("mean must be finite")
        if not np.isfinite(self.std) or self.std <= 0:
            raise DegenerateStatsError("std must be strictly positive")


def interpolate_unvoiced(f0) -> np.ndarray:
    """Fill unvoiced (0.0) frames of an Hz contour.

    Interior gaps get linear interpolation between the flanking voiced
    values; leading/trailing gaps hold the nearest voiced value. Voiced
    frames are returned unchanged.
    """
    f0 = np.asarray(f0, dtype=np.float64)
    voiced = f0 > 0.0
    if not voiced.any():
        raise AllUnvoicedError("contour has no voiced frame")
    if voiced.all():
        return f0.copy()
    idx = np.flatnonzero(voiced)
    # np.interp holds the edge values outside [idx[0], idx[-1]], which is
    # exactly the edge-hold rule for leading/trailing unvoiced runs.
    return np.interp(np.arange(f0.shape[0], dtype=np.float64), idx, f0[idx])


def to_log(f0) -> np.ndarray:
    """Elementwise natural log of a gap-free Hz contour."""
    f0 = np.asarray(f0, dtype=np.float64)
    if (f0 <= 0.0).any() or not np.isfinite(f0).all():
        raise ValueError("to_log requires strictly positive finite values")
    return np.log(f0)


def compute_stats(corpus) -> SpeakerF0Stats:
    """Pooled mean and population std over voiced frames of all utterances.

    `corpus` is an iterable of (log_f0, voicing_mask) pairs; the mask keeps
    the original voiced/unvoiced decision even though log_f0 is gap-free.
    """
    pooled = []
    for values, mask in corpus:
        values = np.asarray(values, dtype=np.float64)
        mask = np.asarray(mask, dtype=bool)
        if values.shape != mask.shape:
            raise ValueError("log-F0 and mask lengths disagree")
        pooled.append(values[mask])
    if not pooled:
        raise DegenerateStatsError("empty corpus")
    pooled = np.concatenate(pooled)
    if pooled.size < 2:
        raise DegenerateStatsError("need at least two voiced frames, got %d" % pooled.size)
    mean = float(pooled.mean())
    std = float(pooled.std())  # population std, ddof=0
    if std <= 0.0:
        raise DegenerateStatsError("zero variance across voiced frames")
    return SpeakerF0Stats(mean=mean, std=std, n_voiced=int(pooled.size))


def normalize(logf0, stats: SpeakerF0Stats) -> np.ndarray:
    return (np.asarray(logf0, dtype=np.float64) - stats.mean) / stats.std


def denormalize(norm, stats: SpeakerF0Stats) -> np.ndarray:
    return np.asarray(norm, dtype=np.float64) * stats.std + stats.mean


def reapply_voicing(f0_hz, mask) -> np.ndarray:
    """Zero the frames where mask is False; others pass through untouched."""
    f0_hz = np.asarray(f0_hz, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if f0_hz.shape != mask.shape:
        raise ValueError("contour and mask lengths disagree")
    out = f0_hz.copy()
    out[~mask] = 0.0
    return out


def lg_convert(f0_src, src: SpeakerF0Stats, tgt: SpeakerF0Stats) -> np.ndarray:
    """Log-Gaussian normalized F0 transform.

    Voiced frames map by exp(((ln f0 - mu_src)/sigma_src) * sigma_tgt + mu_tgt);
    unvoiced frames (0.0) pass through unchanged.
    """
    f0_src = np.asarray(f0_src, dtype=np.float64)
    out = np.zeros_like(f0_src)
    voiced = f0_src > 0.0
    if voiced.any():
        z = (np.log(f0_src[voiced]) - src.mean) / src.std
        out[voiced] = np.exp(z * tgt.std + tgt.mean)
    return out


def save_stats(stats: SpeakerF0Stats, path) -> None:
    with open(path, "w") as fh:
        fh.write("# voiced log-F0 statistics\n")
        fh.write("mean=%r\n" % stats.mean)
        fh.write("std=%r\n" % stats.std)
        fh.write("n_voiced=%d\n" % stats.n_voiced)


def load_stats(path) -> SpeakerF0Stats:
    fields = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("malformed stats line: %r" % line)
            key, value = line.split("=", 1)
            key = key.strip()
            if key in fields:
                raise ValueError("duplicate stats key: %r" % key)
            fields[key] = value.strip()
    try:
        return SpeakerF0Stats(
            mean=float(fields["mean"]),
            std=float(fields["std"]),
            n_voiced=int(fields["n_voiced"]),
        )
    except KeyError as exc:
        raise ValueError("missing stats key: %s" % exc) from exc
