"""Binary snapshots for bit-exact restart.

Layout, little-endian::

    8s   magic  b"KSSSNAP\\0"
    u32  format version (1)
    u32  number of axes d
    d*u32  extents
    d*f64  side lengths
    f64  t
    f64  cumulative reaction
    f64  cumulative 2*dt*||grad m||^2
    u64  step count
    u8   u divergence-free flag
    f64 arrays, row-major: rho, m, c, u_1..u_d, P
    u32  CRC32 of everything above
"""

from __future__ import annotations

import os
import struct
import zlib
from pathlib import Path

import numpy as np

from ..domain import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField
from ..exceptions import SnapshotFormatError
from ..model import SimState

MAGIC = b"KSSSNAP\0"
VERSION = 1


def encode_snapshot(state: SimState) -> bytes:
    grid = state.grid
    d = grid.ndim
    head = struct.pack("<8sII", MAGIC, VERSION, d)
    head += struct.pack(f"<{d}I", *grid.dims)
    head += struct.pack(f"<{d}d", *grid.lengths)
    head += struct.pack("<dddQB", state.t, state.cum_reaction, state.cum_dissipation_m,
                        state.steps, int(state.u.divergence_free))
    arrays = [state.rho.values, state.m.values, state.c.values, *state.u.components, state.p.values]
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in arrays)
    payload = head + body
    return payload + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)


def decode_snapshot(data: bytes) -> SimState:
    try:
        magic, version, d = struct.unpack_from("<8sII", data, 0)
    except struct.error as exc:
        raise SnapshotFormatError("snapshot truncated in header") from exc
    if magic != MAGIC:
        raise SnapshotFormatError("not a snapshot file (bad magic)")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    if d not in (2, 3):
        raise SnapshotFormatError(f"bad axis count {d}")
    offset = 16
    try:
        dims = struct.unpack_from(f"<{d}I", data, offset)
        offset += 4 * d
        lengths = struct.unpack_from(f"<{d}d", data, offset)
        offset += 8 * d
        t, cum_r, cum_d, steps, divfree = struct.unpack_from("<dddQB", data, offset)
        offset += struct.calcsize("<dddQB")
    except struct.error as exc:
        raise SnapshotFormatError("snapshot truncated in header") from exc
    n = int(np.prod(dims))
    n_arrays = 4 + d
    expected = offset + 8 * n * n_arrays + 4
    if len(data) != expected:
        raise SnapshotFormatError(f"snapshot has {len(data)} bytes, expected {expected}")
    (crc,) = struct.unpack_from("<I", data, expected - 4)
    if crc != zlib.crc32(data[: expected - 4]) & 0xFFFFFFFF:
        raise SnapshotFormatError("snapshot checksum mismatch")
    try:
        grid = Grid(dims, lengths)
    except Exception as exc:
        raise SnapshotFormatError(f"bad grid in snapshot: {exc}") from exc
    flat = np.frombuffer(data, dtype="<f8", count=n * n_arrays, offset=offset).astype(np.float64)
    arrays = [a.reshape(dims).copy() for a in np.split(flat, n_arrays)]
    rho, m, c = (ScalarField(grid, a, NEUMANN) for a in arrays[:3])
    u = VectorField(grid, tuple(arrays[3:3 + d]), DIRICHLET, bool(divfree))
    p = ScalarField(grid, arrays[3 + d], NEUMANN)
    return SimState(rho, m, c, u, p, t=t, cum_reaction=cum_r, cum_dissipation_m=cum_d, steps=steps)


def write_snapshot(state: SimState, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(encode_snapshot(state))
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_snapshot(path) -> SimState:
    with open(path, "rb") as fh:
        return decode_snapshot(fh.read())
