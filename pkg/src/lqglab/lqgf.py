"""LQGF binary field files.

Layout, all little-endian:
  offset 0   magic bytes 4C 51 47 46 ("LQGF")
  offset 4   version   u32 (currently 1)
  offset 8   n         u64
  offset 16  spacing   f64
  offset 24  origin_x  f64
  offset 32  origin_y  f64
  offset 40  kind      u8   (0 zero-boundary, 1 whole-plane proxy)
  offset 41  cutoff    u64
  offset 49  seed      u64
  offset 57  values    n*n f64, row-major from the origin corner
"""

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .field import FieldGrid, FieldKind

__all__ = ["MAGIC", "VERSION", "write_lqgf", "read_lqgf"]

MAGIC = b"LQGF"
VERSION = 1
_HEADER = struct.Struct("<4sIQdddBQQ")


def write_lqgf(field: FieldGrid, path) -> None:
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        field.n,
        field.spacing,
        field.origin.real,
        field.origin.imag,
        int(field.kind),
        field.cutoff,
        int(field.seed) & (2**64 - 1),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_lqgf(path) -> FieldGrid:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"truncated header: {len(data)} bytes < {_HEADER.size} (offset 0)")
    magic, version, n, spacing, ox, oy, kind, cutoff, seed = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at offset 0, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version} at offset 4, expected {VERSION}")
    try:
        field_kind = FieldKind(kind)
    except ValueError:
        raise FormatError(f"unknown kind byte {kind} at offset 40") from None
    expected = _HEADER.size + 8 * n * n
    if len(data) != expected:
        raise FormatError(
            f"payload size mismatch at offset {_HEADER.size}: file has {len(data)} bytes, "
            f"expected {expected} for n={n}"
        )
    values = np.frombuffer(data, dtype="<f8", count=n * n, offset=_HEADER.size)
    values = values.reshape(n, n).astype(np.float64)
    return FieldGrid(
        n=int(n),
        spacing=float(spacing),
        origin=complex(ox, oy),
        values=values,
        kind=field_kind,
        cutoff=int(cutoff),
        seed=int(seed),
    )
