"""T3B binary tensor interchange format.

Layout: magic "T3B1", three little-endian uint64 dims (n1, n2, n3), then
n1*n2*n3 little-endian float64 values in slice-major order (frontal
slice index outermost, then column, then row).
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"T3B1"
_MAX_DIM = 1 << 32


class T3BError(ValueError):
    pass


def write_tensor(T, path):
    T = np.asarray(T, dtype="<f8")
    if T.ndim != 3:
        raise T3BError(f"expected a third-order tensor, got ndim={T.ndim}")
    n1, n2, n3 = T.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQQ", n1, n2, n3))
        # slice-major: k outer, then j, then i
        fh.write(np.ascontiguousarray(T.transpose(2, 1, 0)).tobytes())


def read_tensor(path):
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != MAGIC:
            raise T3BError(f"bad magic in {path!r}")
        dims = fh.read(24)
        if len(dims) != 24:
            raise T3BError("truncated header")
        n1, n2, n3 = struct.unpack("<QQQ", dims)
        if max(n1, n2, n3) >= _MAX_DIM:
            raise T3BError(f"implausible dimensions ({n1}, {n2}, {n3})")
        payload = fh.read()
    expected = n1 * n2 * n3 * 8
    if len(payload) != expected:
        raise T3BError(
            f"payload holds {len(payload) // 8} values, expected {n1 * n2 * n3}")
    flat = np.frombuffer(payload, dtype="<f8")
    return np.ascontiguousarray(flat.reshape(n3, n2, n1).transpose(2, 1, 0))
