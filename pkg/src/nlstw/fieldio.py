"""Binary snapshot format for fields ("NLSTW1").

Layout: magic bytes ``NLSTW1\\0``, then little-endian u32 kind (0 = real,
1 = complex), u32 n1, u32 n2, f64 L1, f64 L2, followed by the payload:
n1*n2 f64 values for a real field, or 2*n1*n2 f64 (re, im interleaved)
for a complex one, row-major with x1 varying fastest.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .grid import ComplexField, Grid, ScalarField

MAGIC = b"NLSTW1\x00"
_HEADER = struct.Struct("<III dd")


def write_field(path, f):
    """Write a ScalarField or ComplexField atomically (temp file + rename)."""
    g = f.grid
    kind = 0 if isinstance(f, ScalarField) else 1
    header = MAGIC + _HEADER.pack(kind, g.n1, g.n2, g.L1, g.L2)
    # x1 varies fastest: column-major ravel of the (n1, n2) array
    flat = np.ravel(f.values, order="F")
    if kind == 0:
        payload = flat.astype("<f8").tobytes()
    else:
        inter = np.empty(2 * flat.size, dtype="<f8")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        payload = inter.tobytes()
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nlstw-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_field(path):
    """Load a field written by :func:`write_field`."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not an NLSTW1 field file")
        kind, n1, n2, L1, L2 = _HEADER.unpack(fh.read(_HEADER.size))
        if kind not in (0, 1):
            raise ValueError(f"{path}: unknown field kind {kind}")
        count = n1 * n2 * (2 if kind else 1)
        payload = np.fromfile(fh, dtype="<f8", count=count)
    if payload.size != count:
        raise ValueError(f"{path}: truncated payload")
    grid = Grid(L1=L1, L2=L2, n1=n1, n2=n2)
    if kind == 0:
        values = payload.reshape((n1, n2), order="F")
        return ScalarField(grid, values)
    values = (payload[0::2] + 1j * payload[1::2]).reshape((n1, n2), order="F")
    return ComplexField(grid, values)
