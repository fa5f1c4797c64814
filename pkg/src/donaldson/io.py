"""Binary dump format for forms on the grid.

Layout (all little-endian)::

    8 bytes   magic b"DGF4FORM"
    u32       format version (1)
    u32       grid_n
    u8        degree
    3 bytes   reserved, zero
    f64[...]  components in lexicographic multi-index order,
              each block with x1 slowest and x4 fastest

The header is 20 bytes.
"""
from __future__ import annotations

import struct
from math import comb
from pathlib import Path

import numpy as np

from .fields4 import DIM, Form

MAGIC = b"DGF4FORM"
VERSION = 1
_HEADER = struct.Struct("<8sIIB3x")
HEADER_SIZE = _HEADER.size


class FormatError(ValueError):
    pass


def dump_field(a: Form, path) -> None:
    header = _HEADER.pack(MAGIC, VERSION, a.n, a.degree)
    body = np.ascontiguousarray(a.c, dtype="<f8").tobytes()
    Path(path).write_bytes(header + body)


def load_field(path) -> Form:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header")
    magic, version, n, degree = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if raw[17:20] != b"\0\0\0":
        raise FormatError(f"{path}: reserved header bytes are not zero")
    if degree > DIM:
        raise FormatError(f"{path}: degree {degree} out of range")
    shape = (comb(DIM, degree),) + (n,) * DIM
    expected = HEADER_SIZE + 8 * int(np.prod(shape))
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    c = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE).reshape(shape)
    return Form(degree, c.astype(float))
