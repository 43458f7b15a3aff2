"""Binary persistence for grid fields.

Layout, little-endian throughout::

    b"VFB1"            magic
    u32 version = 1
    u32 n, u32 m
    u64 dims[n]
    f64 origin[n]
    f64 spacing
    f64 values[prod(dims) * m]   node-lexicographic, last axis fastest,
                                 component index innermost

The Dirichlet mask is not stored; fields read back carry the grid hull mask.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InputError
from .model import Grid, VectorField

MAGIC = b"VFB1"
VERSION = 1
_HEAD = struct.Struct("<4sIII")


def encode_field(u: VectorField) -> bytes:
    g = u.grid
    parts = [
        _HEAD.pack(MAGIC, VERSION, g.n, u.m),
        struct.pack(f"<{g.n}Q", *g.dims),
        struct.pack(f"<{g.n}d", *g.origin),
        struct.pack("<d", g.h),
        np.ascontiguousarray(u.values, dtype="<f8").tobytes(order="C"),
    ]
    return b"".join(parts)


def decode_field(data: bytes) -> VectorField:
    if len(data) < _HEAD.size:
        raise InputError("field file is truncated")
    magic, version, n, m = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise InputError(f"not a field file: magic {magic!r}")
    if version != VERSION:
        raise InputError(f"unsupported field file version {version}")
    if n not in (1, 2, 3) or m < 1:
        raise InputError(f"invalid field file header n={n}, m={m}")
    off = _HEAD.size
    dims = struct.unpack_from(f"<{n}Q", data, off)
    off += 8 * n
    origin = struct.unpack_from(f"<{n}d", data, off)
    off += 8 * n
    (h,) = struct.unpack_from("<d", data, off)
    off += 8
    count = m * int(np.prod(dims))
    if len(data) - off != 8 * count:
        raise InputError(f"payload holds {(len(data) - off) // 8} values, expected {count}")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(float)
    grid = Grid(n, tuple(int(d) for d in dims), tuple(origin), h)
    return VectorField(grid, values.reshape(grid.dims + (m,)), grid.boundary_mask())


def write_field(path, u: VectorField) -> None:
    Path(path).write_bytes(encode_field(u))


def read_field(path) -> VectorField:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"field file not found: {p}")
    return decode_field(p.read_bytes())
