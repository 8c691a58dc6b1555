"""VCM1 checkpoint format for named parameter tensors.

Layout (little-endian):

    magic "VCM1" | u32 version=1 | u32 n_params
    then per parameter:
    u16 name length | name bytes (utf-8) | u8 rank | u32 extent per dim
    | f64 data row-major

Doubles round-trip bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"VCM1"
VERSION = 1


class CheckpointError(ValueError):
    pass


def write_params(named_params, sink) -> None:
    """Serialize an iterable of objects with .name and .data (ndarray)."""
    items = list(named_params)
    sink.write(MAGIC)
    sink.write(struct.pack("<II", VERSION, len(items)))
    for p in items:
        name = p.name.encode("utf-8")
        data = np.ascontiguousarray(p.data, dtype="<f8")
        sink.write(struct.pack("<H", len(name)))
        sink.write(name)
        sink.write(struct.pack("<B", data.ndim))
        sink.write(struct.pack("<%dI" % data.ndim, *data.shape))
        sink.write(data.tobytes())


def read_params(source) -> dict:
    """Parse a VCM1 stream into an ordered {name: ndarray} dict."""

    def take(n, what):
        data = source.read(n)
        if data is None or len(data) < n:
            raise CheckpointError("truncated checkpoint while reading %s" % what)
        return data

    if take(4, "magic") != MAGIC:
        raise CheckpointError("bad checkpoint magic")
    version, count = struct.unpack("<II", take(8, "header"))
    if version != VERSION:
        raise CheckpointError("unsupported checkpoint version %d" % version)
    out = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2, "name length"))
        name = take(name_len, "name").decode("utf-8")
        (rank,) = struct.unpack("<B", take(1, "rank"))
        shape = struct.unpack("<%dI" % rank, take(4 * rank, "extents"))
        size = int(np.prod(shape, dtype=np.int64)) if rank else 1
        data = np.frombuffer(take(8 * size, "data"), dtype="<f8").astype(np.float64)
        if name in out:
            raise CheckpointError("duplicate parameter name %r" % name)
        out[name] = data.reshape(shape)
    return out


def save_model(model, path) -> None:
    with open(path, "wb") as fh:
        write_params(model.parameters(), fh)


def load_model_into(model, path) -> None:
    """Fill a model's parameters from a checkpoint, matching by name."""
    with open(path, "rb") as fh:
        loaded = read_params(fh)
    for p in model.parameters():
        if p.name not in loaded:
            raise CheckpointError("checkpoint is missing parameter %r" % p.name)
        arr = loaded.pop(p.name)
        if arr.shape != p.data.shape:
            raise CheckpointError(
                "shape mismatch for %r: %s vs %s" % (p.name, arr.shape, p.data.shape)
            )
        p.data[...] = arr
    if loaded:
        raise CheckpointError("checkpoint has extra parameters: %s" % sorted(loaded))
