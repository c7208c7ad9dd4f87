"""Grid and field dumps for debugging and external tools.

Text mask dump (UTF-8 lines)::

    neckwall-mask 1
    shape NX NY NZ
    widths-x w_0 ... w_{NX-1}
    widths-y ...
    widths-z ...
    rle r_0 r_1 ...

The mask is flattened in C order (x slowest, z fastest); ``rle`` lists run
lengths alternating inactive, active, inactive, ... starting with an
inactive run (possibly 0).

Binary field dump, little-endian::

    8 bytes   magic b"NWFIELD1"
    3 x u4    NX NY NZ
    u8        number of active cells N
    f8[NX+NY+NZ]  cell widths, then f8[NX+NY+NZ] cell centres
    u1[ceil(NX*NY*NZ/8)]  packed mask bits (numpy.packbits, C order)
    i1[N]     region labels (0 left bulk, 1 neck, 2 right bulk)
    f8[N]     field values on active cells
"""
from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .geometry import DumbbellGrid

MASK_HEADER = "neckwall-mask 1"
FIELD_MAGIC = b"NWFIELD1"


def atomic_write(path, data) -> None:
    """Write ``data`` (str or bytes) to a temp file beside ``path``, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rle_encode(mask: np.ndarray) -> list[int]:
    flat = np.asarray(mask, bool).ravel().astype(np.int8)
    change = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        runs.insert(0, 0)
    return runs


def rle_decode(runs, shape) -> np.ndarray:
    vals = np.arange(len(runs)) % 2 == 1
    flat = np.repeat(vals, runs)
    if flat.size != int(np.prod(shape)):
        raise ValueError("run lengths do not match the grid shape")
    return flat.reshape(shape)


def mask_to_text(grid: DumbbellGrid) -> str:
    lines = [MASK_HEADER, "shape " + " ".join(str(n) for n in grid.shape)]
    for name, w in zip("xyz", grid.widths):
        lines.append(f"widths-{name} " + " ".join(repr(float(v)) for v in w))
    lines.append("rle " + " ".join(str(r) for r in rle_encode(grid.mask)))
    return "\n".join(lines) + "\n"


def mask_from_text(text: str):
    """Returns (mask, widths)."""
    lines = text.strip().splitlines()
    if not lines or lines[0].strip() != MASK_HEADER:
        raise ValueError("not a mask dump")
    fields = {}
    for line in lines[1:]:
        key, _, rest = line.partition(" ")
        fields[key] = rest.split()
    shape = tuple(int(v) for v in fields["shape"])
    widths = tuple(np.array([float(v) for v in fields[f"widths-{a}"]]) for a in "xyz")
    return rle_decode([int(v) for v in fields["rle"]], shape), widths


def field_to_bytes(grid: DumbbellGrid, values) -> bytes:
    u = np.asarray(values, "<f8")
    if u.shape != (grid.n_active,):
        raise ValueError("field does not match the grid")
    parts = [FIELD_MAGIC, struct.pack("<3IQ", *grid.shape, grid.n_active)]
    parts += [np.asarray(w, "<f8").tobytes() for w in grid.widths]
    parts += [np.asarray(c, "<f8").tobytes() for c in grid.centres]
    parts.append(np.packbits(grid.mask.ravel()).tobytes())
    parts.append(np.asarray(grid.region, "i1").tobytes())
    parts.append(u.tobytes())
    return b"".join(parts)


def field_from_bytes(buf: bytes) -> dict:
    """Parse a binary field dump into widths, centres, mask, region and values."""
    if buf[:8] != FIELD_MAGIC:
        raise ValueError("not a field dump")
    nx, ny, nz, n = struct.unpack_from("<3IQ", buf, 8)
    off = 8 + struct.calcsize("<3IQ")

    def take(dtype, count):
        nonlocal off
        arr = np.frombuffer(buf, dtype=dtype, count=count, offset=off)
        off += arr.nbytes
        return arr.copy()

    widths = tuple(take("<f8", k) for k in (nx, ny, nz))
    centres = tuple(take("<f8", k) for k in (nx, ny, nz))
    total = nx * ny * nz
    mask = np.unpackbits(take("u1", (total + 7) // 8))[:total].astype(bool).reshape(nx, ny, nz)
    region = take("i1", n)
    values = take("<f8", n)
    if off != len(buf) or int(mask.sum()) != n:
        raise ValueError("corrupt field dump")
    return {"widths": widths, "centres": centres, "mask": mask, "region": region, "values": values}
