"""Raw raster dump format for debugging field snapshots.

Layout: a 32-byte header (magic ``CRITFLD1``, u32 n, f64 L, f64 t, 4 pad
bytes) followed by the ``n*n`` samples as little-endian float64, row major.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import RealField, TorusGrid

MAGIC = b"CRITFLD1"
_HEADER = struct.Struct("<8sIdd4x")
assert _HEADER.size == 32


def write_field(path, f: RealField, t: float = 0.0) -> None:
    """Write one field snapshot tagged with time ``t``."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, f.grid.n, f.grid.L, t))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path) -> tuple[RealField, float]:
    """Read a snapshot back; returns the field and its time tag."""
    raw = Path(path).read_bytes()
    magic, n, L, t = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"not a CRITFLD1 raster: magic={magic!r}")
    vals = np.frombuffer(raw, dtype="<f8", count=n * n, offset=_HEADER.size)
    return RealField(TorusGrid(L, n), vals.reshape(n, n).astype(np.float64)), t
