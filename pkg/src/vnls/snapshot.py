"""Binary ``.vns`` field snapshots.

Layout (all little-endian)::

    b"VNLS"            magic
    u32                format version (1)
    u32                n_dims
    u32 * n_dims       points per axis
    u32                component count N
    f64                time
    f64 pairs          (re, im) per sample, row-major over (x_1, ..., x_n, component)

The domain length is not stored; a reader supplies the grid it expects or
gets back bare arrays from :func:`read_vns_array`.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ShapeMismatch
from .fields import Field
from .grid import GridSpec

MAGIC = b"VNLS"
VERSION = 1


def encode_vns(field: Field) -> bytes:
    g = field.grid
    header = MAGIC + struct.pack("<II", VERSION, g.n_dims)
    header += struct.pack(f"<{g.n_dims}I", *g.spatial_shape)
    header += struct.pack("<Id", g.component_count, float(field.time or 0.0))
    body = np.ascontiguousarray(field.samples, dtype="<c16").tobytes()
    return header + body


def decode_vns(blob: bytes) -> tuple[np.ndarray, float]:
    """Samples of shape ``dims + (N,)`` and the stored time."""
    if blob[:4] != MAGIC:
        raise ValueError("not a VNLS snapshot (bad magic)")
    version, n = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    offset = 12
    dims = struct.unpack_from(f"<{n}I", blob, offset)
    offset += 4 * n
    comps, t = struct.unpack_from("<Id", blob, offset)
    offset += 12
    shape = tuple(dims) + (comps,)
    count = int(np.prod(shape))
    if len(blob) - offset != 16 * count:
        raise ValueError(f"snapshot body holds {len(blob) - offset} bytes, expected {16 * count}")
    data = np.frombuffer(blob, dtype="<c16", count=count, offset=offset).reshape(shape)
    return data.astype(complex), t


def write_vns(path, field: Field) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_vns(field))


def read_vns_array(path) -> tuple[np.ndarray, float]:
    with open(path, "rb") as fh:
        return decode_vns(fh.read())


def read_vns(path, grid: GridSpec) -> Field:
    data, t = read_vns_array(path)
    if data.shape != grid.shape:
        raise ShapeMismatch(f"snapshot shape {data.shape} does not match grid {grid.shape}")
    return Field(grid, data, t)
