"""Ten-scale Mexican-hat wavelet decomposition of normalized log-F0.

Scale i (1-based) is labelled by the pseudo-period tau_i = 2^(i+1) * tau0
with tau0 = 5 ms, so the ten columns cover 20 ms ... 10240 ms. The kernel
at a scale is the Mexican hat stretched so that its peak frequency
response sits at the labelled period: the Gaussian width in frames is
tau / (2*pi/sqrt(2)). Column i carries the weight (i + 2.5)^(-5/2); the
recomposition applies the same weights again and sums.

Numerics:
  * kernels are truncated at KERNEL_CUTOFF_SIGMAS widths and then
    mean-subtracted, so a constant input maps to (numerically) zero;
  * boundaries are mirror-padded;
  * each output sample is one fixed-order inner product, so per-scale
    columns could be computed in parallel and still match the sequential
    result bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

N_SCALES = 10
TAU0_MS = 5.0
MOTHER_NORM = 2.0 / (math.sqrt(3.0) * math.pi ** 0.25)  # unit L2 norm
FOURIER_FACTOR = 2.0 * math.pi / math.sqrt(2.0)  # peak-response period per unit width
KERNEL_CUTOFF_SIGMAS = 5.0

# (i + 2.5)^(-5/2) for i = 1..10, applied once on analysis and once on synthesis.
SCALE_WEIGHTS = (np.arange(1, N_SCALES + 1) + 2.5) ** -2.5
SCALE_WEIGHTS.flags.writeable = False


def scale_periods_ms(tau0_ms: float = TAU0_MS) -> np.ndarray:
    """Pseudo-periods of the ten scales: 2^(i+1)*tau0, i = 1..10."""
    return 2.0 ** (np.arange(1, N_SCALES + 1) + 1) * tau0_ms


def mexican_hat(x):
    """Mexican hat mother wavelet with unit L2 norm."""
    x = np.asarray(x, dtype=np.float64)
    return MOTHER_NORM * (1.0 - x * x) * np.exp(-0.5 * x * x)


def _mirror_pad(x, pad):
    if x.shape[0] == 1:
        return np.full(1 + 2 * pad, x[0])
    return np.pad(x, pad, mode="reflect")


def cwt_scale(signal, tau_frames: float) -> np.ndarray:
    """Wavelet response of a 1-D signal at one scale.

    `tau_frames` is the scale's pseudo-period in frames. Output has the
    same length as the input.
    """
    x = np.ascontiguousarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 1:
        raise ValueError("signal must be a non-empty 1-D array")
    if not np.isfinite(x).all():
        raise ValueError("signal contains non-finite values")
    if not tau_frames > 0.0:
        raise ValueError("scale must be positive, got %r" % tau_frames)
    width = tau_frames / FOURIER_FACTOR
    half = int(math.ceil(KERNEL_CUTOFF_SIGMAS * width))
    kern = mexican_hat(np.arange(-half, half + 1, dtype=np.float64) / width)
    kern -= kern.mean()  # truncated kernel made exactly zero-mean
    kern *= tau_frames ** -0.5
    padded = _mirror_pad(x, half)
    return kernels.correlate_valid(padded, kern)


@dataclass(frozen=True)
class CwtMatrix:
    """T x 10 matrix of weighted wavelet coefficients."""

    coeffs: np.ndarray
    frame_period_ms: float
    tau0_ms: float = TAU0_MS

    def __post_init__(self):
        coeffs = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if coeffs.ndim != 2 or coeffs.shape[1] != N_SCALES:
            raise ValueError("coefficient matrix must be T x %d" % N_SCALES)
        if not np.isfinite(coeffs).all():
            raise ValueError("coefficients contain non-finite values")
        if self.frame_period_ms <= 0:
            raise ValueError("frame_period_ms must be positive")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n_frames(self):
        return self.coeffs.shape[0]


def decompose10(norm_logf0, frame_period_ms: float = 5.0) -> CwtMatrix:
    """Decompose a normalized log-F0 contour into the ten weighted scales."""
    x = np.ascontiguousarray(norm_logf0, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValueError("input contains non-finite values")
    periods = scale_periods_ms()
    coeffs = np.empty((x.shape[0], N_SCALES))
    for i in range(N_SCALES):
        coeffs[:, i] = cwt_scale(x, periods[i] / frame_period_ms) * SCALE_WEIGHTS[i]
    return CwtMatrix(coeffs=coeffs, frame_period_ms=frame_period_ms)


def recompose10(m: CwtMatrix) -> np.ndarray:
    """Weighted column sum that approximately inverts decompose10."""
    return m.coeffs @ SCALE_WEIGHTS


@dataclass(frozen=True)
class ScaleStats:
    """Per-scale mean/std of wavelet coefficients over a corpus."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        std = np.ascontiguousarray(self.std, dtype=np.float64)
        if mean.shape != (N_SCALES,) or std.shape != (N_SCALES,):
            raise ValueError("scale stats need exactly %d entries" % N_SCALES)
        if not (np.isfinite(mean).all() and np.isfinite(std).all()):
            raise ValueError("scale stats contain non-finite values")
        if (std <= 0).any():
            raise ValueError("scale std must be strictly positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


def compute_scale_stats(matrices) -> ScaleStats:
    """Pooled per-column stats over an iterable of CwtMatrix."""
    stacked = np.concatenate([m.coeffs for m in matrices], axis=0)
    if stacked.shape[0] < 2:
        raise ValueError("need at least two frames of coefficients")
    std = stacked.std(axis=0)
    if (std <= 0).any():
        raise ValueError("zero variance in at least one scale")
    return ScaleStats(mean=stacked.mean(axis=0), std=std)


def standardize_scales(m: CwtMatrix, s: ScaleStats) -> CwtMatrix:
    return CwtMatrix(
        coeffs=(m.coeffs - s.mean) / s.std,
        frame_period_ms=m.frame_period_ms,
        tau0_ms=m.tau0_ms,
    )


def destandardize_scales(m: CwtMatrix, s: ScaleStats) -> CwtMatrix:
    return CwtMatrix(
        coeffs=m.coeffs * s.std + s.mean,
        frame_period_ms=m.frame_period_ms,
        tau0_ms=m.tau0_ms,
    )


CSV_HEADER = "t," + ",".join("scale%d" % i for i in range(1, N_SCALES + 1))


def write_cwt_csv(m: CwtMatrix, sink) -> None:
    """Dump coefficients as CSV with header `t,scale1..scale10`."""
    sink.write(CSV_HEADER + "\n")
    for t in range(m.n_frames):
        row = ",".join(format(v, ".17g") for v in m.coeffs[t])
        sink.write("%d,%s\n" % (t, row))


def read_cwt_csv(source, frame_period_ms: float = 5.0) -> CwtMatrix:
    header = source.readline().strip()
    if header != CSV_HEADER:
        raise ValueError("unexpected CWT CSV header: %r" % header)
    rows = []
    for line in source:
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != N_SCALES + 1:
            raise ValueError("CWT CSV row has %d fields" % len(parts))
        rows.append([float(v) for v in parts[1:]])
    if not rows:
        raise ValueError("CWT CSV holds no frames")
    return CwtMatrix(coeffs=np.asarray(rows), frame_period_ms=frame_period_ms)
