"""Frame-synchronous feature containers and the VCF1 on-disk format.

VCF1 layout (all little-endian):

    magic "VCF1" | u32 version=1 | f64 frame_period_ms | u32 sample_rate_hz
    | u32 T | u32 D_mcep | u32 D_ap
    | f64 f0[T] | f64 mcep[T*D_mcep] row-major | f64 ap[T*D_ap] row-major

Header is exactly the seven fields above (32 bytes). Doubles are stored
bit-exact, so write -> read is the identity.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"VCF1"
VERSION = 1

_HEADER = struct.Struct("<4sIdIIII")
HEADER_SIZE = _HEADER.size  # 32


class FormatError(ValueError):
    """Malformed VCF1 byte stream."""


class BadMagicError(FormatError):
    pass


class BadVersionError(FormatError):
    pass


class TruncatedError(FormatError):
    pass


class NonFiniteDataError(FormatError):
    pass


class InvariantError(ValueError):
    """Feature arrays violate the UtteranceFeatures contract."""


def _frozen(arr, dtype=np.float64):
    out = np.array(arr, dtype=dtype, order="C", copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class UtteranceFeatures:
    """One utterance of frame-synchronous vocoder features.

    f0 is in Hz with 0.0 marking unvoiced frames; mcep and ap hold one row
    per frame. Arrays are copied and made read-only at construction, so
    instances are safe to share across threads.
    """

    frame_period_ms: float
    sample_rate_hz: int
    f0: np.ndarray
    mcep: np.ndarray
    ap: np.ndarray

    def __post_init__(self):
        f0 = np.asarray(self.f0, dtype=np.float64)
        mcep = np.asarray(self.mcep, dtype=np.float64)
        ap = np.asarray(self.ap, dtype=np.float64)
        if f0.ndim != 1 or mcep.ndim != 2 or ap.ndim != 2:
            raise InvariantError("f0 must be 1-D, mcep and ap must be 2-D")
        t = f0.shape[0]
        if t < 1:
            raise InvariantError("need at least one frame")
        if mcep.shape[0] != t or ap.shape[0] != t:
            raise InvariantError(
                "frame counts disagree: f0=%d mcep=%d ap=%d"
                % (t, mcep.shape[0], ap.shape[0])
            )
        if not np.isfinite(self.frame_period_ms) or self.frame_period_ms <= 0:
            raise InvariantError("frame_period_ms must be positive and finite")
        if int(self.sample_rate_hz) <= 0:
            raise InvariantError("sample_rate_hz must be positive")
        if not np.isfinite(f0).all():
            raise InvariantError("f0 contains non-finite values")
        if (f0 < 0).any():
            raise InvariantError("f0 values must be 0.0 (unvoiced) or positive")
        if not np.isfinite(mcep).all():
            raise InvariantError("mcep contains non-finite values")
        if not np.isfinite(ap).all():
            raise InvariantError("ap contains non-finite values")
        object.__setattr__(self, "frame_period_ms", float(self.frame_period_ms))
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))
        object.__setattr__(self, "f0", _frozen(f0))
        object.__setattr__(self, "mcep", _frozen(mcep))
        object.__setattr__(self, "ap", _frozen(ap))

    @property
    def n_frames(self):
        return self.f0.shape[0]

    @property
    def d_mcep(self):
        return self.mcep.shape[1]

    @property
    def d_ap(self):
        return self.ap.shape[1]


def voicing_mask(f0) -> np.ndarray:
    """Boolean mask, True where the frame is voiced (f0 > 0)."""
    return np.asarray(f0, dtype=np.float64) > 0.0


@dataclass(frozen=True)
class FeatureDiagnostics:
    frame_count: int
    voiced_fraction: float
    f0_nonfinite: int
    mcep_nonfinite: int
    ap_nonfinite: int


def validate(feat: UtteranceFeatures) -> FeatureDiagnostics:
    """Compute diagnostics without mutating the input; never raises."""
    t = feat.n_frames
    voiced = int(np.count_nonzero(feat.f0 > 0.0))
    return FeatureDiagnostics(
        frame_count=t,
        voiced_fraction=voiced / t,
        f0_nonfinite=int(np.count_nonzero(~np.isfinite(feat.f0))),
        mcep_nonfinite=int(np.count_nonzero(~np.isfinite(feat.mcep))),
        ap_nonfinite=int(np.count_nonzero(~np.isfinite(feat.ap))),
    )


def _check_invariants(feat):
    # Arrays are read-only, but re-validate so a writer never emits a
    # partially bad record even if someone re-enabled writeable flags.
    UtteranceFeatures(
        feat.frame_period_ms, feat.sample_rate_hz, feat.f0, feat.mcep, feat.ap
    )


def write_features(feat: UtteranceFeatures, sink) -> None:
    """Serialize to the VCF1 layout. Emits nothing if the input is invalid."""
    _check_invariants(feat)
    t = feat.n_frames
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        feat.frame_period_ms,
        feat.sample_rate_hz,
        t,
        feat.d_mcep,
        feat.d_ap,
    )
    payload = b"".join(
        (
            header,
            feat.f0.astype("<f8", copy=False).tobytes(),
            np.ascontiguousarray(feat.mcep, dtype="<f8").tobytes(),
            np.ascontiguousarray(feat.ap, dtype="<f8").tobytes(),
        )
    )
    sink.write(payload)


def features_to_bytes(feat: UtteranceFeatures) -> bytes:
    import io

    buf = io.BytesIO()
    write_features(feat, buf)
    return buf.getvalue()


def _read_exact(source, n, what):
    data = source.read(n)
    if data is None or len(data) < n:
        raise TruncatedError(
            "truncated %s: wanted %d bytes, got %d" % (what, n, 0 if data is None else len(data))
        )
    return data


def read_features(source) -> UtteranceFeatures:
    """Parse one VCF1 record; the result satisfies all type invariants."""
    raw = _read_exact(source, HEADER_SIZE, "header")
    magic, version, frame_period_ms, rate, t, d_mcep, d_ap = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise BadMagicError("bad magic %r" % magic)
    if version != VERSION:
        raise BadVersionError("unsupported version %d" % version)
    if t < 1:
        raise InvariantError("header declares zero frames")

    def block(count, what):
        data = _read_exact(source, 8 * count, what)
        return np.frombuffer(data, dtype="<f8").astype(np.float64)

    f0 = block(t, "f0 payload")
    mcep = block(t * d_mcep, "mcep payload").reshape(t, d_mcep)
    ap = block(t * d_ap, "ap payload").reshape(t, d_ap)
    extra = source.read(1)
    if extra:
        raise FormatError("trailing bytes after declared payload")
    for name, arr in (("f0", f0), ("mcep", mcep), ("ap", ap)):
        if not np.isfinite(arr).all():
            raise NonFiniteDataError("non-finite values in %s payload" % name)
    return UtteranceFeatures(frame_period_ms, rate, f0, mcep, ap)


def features_from_bytes(data: bytes) -> UtteranceFeatures:
    import io

    return read_features(io.BytesIO(data))


def load_features(path) -> UtteranceFeatures:
    with open(path, "rb") as fh:
        return read_features(fh)


def save_features(feat: UtteranceFeatures, path) -> None:
    with open(path, "wb") as fh:
        write_features(feat, fh)
