"""PLIF: the binary container for piecewise lattice interpolants.

Layout, all fields little-endian::

    offset  size  field
    0       4     magic b"PLIF"
    4       2     format version (u16, currently 1)
    6       2     flags (u16; bit 0 = quantized)
    8       4     d (u32)
    12      4     ell (u32)
    16      8     m, cells per axis (u64)
    24      8     beta (f64)
    32      8     L (f64)
    40      4     precision p (u32, 0 for full precision)
    44      8     B, quantization range bound (f64)
    52      8*N   values, N = m**d * C(ell+d, d): f64, or i64 fixed-point codes
                  v * 2**p when quantized
    52+8N   4     CRC32 of the value payload (u32)

A file is therefore exactly ``HEADER_SIZE + 8 N + TRAILER_SIZE`` bytes in
both modes.  Quantized codes only use ``ceil(log2(2 B 2**p + 1))`` of their
64 bits; :func:`packed_payload_bits` reports that packed size, which is the
figure that matters for the storage bound, while the file keeps whole i64
words so it can be memory-mapped without unpacking.
"""
import io
import struct
import zlib
from math import ceil, comb, log2

import numpy as np

from .holder import HolderSpec
from .interp import GridGeometry, PiecewiseInterpolant, quantize, value_bound

MAGIC = b"PLIF"
VERSION = 1
FLAG_QUANTIZED = 0x1
_HEADER = struct.Struct("<4sHHIIQddId")
HEADER_SIZE = _HEADER.size
TRAILER_SIZE = 4


class FormatError(ValueError):
    """Malformed, truncated or corrupted PLIF data."""


def expected_size(geometry):
    return HEADER_SIZE + 8 * geometry.n_mesh + TRAILER_SIZE


def packed_payload_bits(fi):
    """Bits needed to store the values: p-bit fixed point, or 64 per value when full."""
    if not fi.quantized:
        return 64 * fi.geometry.n_mesh
    levels = 2 * fi.bound * 2 ** fi.precision + 1
    return int(ceil(log2(levels))) * fi.geometry.n_mesh


def to_bytes(fi):
    g = fi.geometry
    flags = FLAG_QUANTIZED if fi.quantized else 0
    header = _HEADER.pack(MAGIC, VERSION, flags, g.dim, g.ell, g.m,
                          float(fi.spec.beta), float(fi.spec.L),
                          int(fi.precision), float(fi.bound))
    if fi.quantized:
        payload = quantize(fi.values, fi.precision, fi.bound).astype("<i8").tobytes()
    else:
        payload = fi.values.astype("<f8").tobytes()
    crc = struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)
    return header + payload + crc


def serialize(fi, sink):
    """Write ``fi`` to a path or binary file object; returns the byte count."""
    data = to_bytes(fi)
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
    return len(data)


def from_bytes(data):
    data = bytes(data)
    if len(data) < HEADER_SIZE + TRAILER_SIZE:
        raise FormatError(f"truncated stream: {len(data)} bytes is shorter than the header")
    magic, version, flags, d, ell, m, beta, L, p, B = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported format version {version} (reader supports {VERSION})")
    if flags & ~FLAG_QUANTIZED:
        raise FormatError(f"unknown flag bits 0x{flags:04x}")
    quantized = bool(flags & FLAG_QUANTIZED)
    if quantized != (p > 0):
        raise FormatError(f"quantized flag {quantized} inconsistent with precision {p}")
    if d < 1 or m < 1:
        raise FormatError(f"invalid geometry d={d}, m={m}")
    try:
        spec = HolderSpec(beta, L, int(d))
    except ValueError as exc:
        raise FormatError(f"invalid smoothness parameters: {exc}") from exc
    if ell != spec.ell:
        raise FormatError(f"stored ell={ell} does not match beta={beta}")
    # size check before building the geometry so a forged header cannot force allocation
    n_mesh = m ** d * comb(ell + d, d)
    size = HEADER_SIZE + 8 * n_mesh + TRAILER_SIZE
    if len(data) < size:
        raise FormatError(f"truncated stream: {len(data)} bytes, expected {size}")
    if len(data) > size:
        raise FormatError(f"{len(data) - size} trailing bytes after the checksum")
    geometry = GridGeometry(int(d), int(m), int(ell))
    payload = data[HEADER_SIZE:size - TRAILER_SIZE]
    (crc,) = struct.unpack_from("<I", data, size - TRAILER_SIZE)
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise FormatError("payload checksum mismatch")
    shape = (geometry.n_cells, geometry.n_nodes)
    if quantized:
        codes = np.frombuffer(payload, dtype="<i8").reshape(shape)
        values = codes.astype(np.float64) / float(2 ** p)
    else:
        values = np.frombuffer(payload, dtype="<f8").reshape(shape).astype(np.float64)
    if quantized and abs(B - value_bound(spec)) > 1e-12 * max(1.0, B):
        raise FormatError(f"stored range bound {B} does not match beta, L, d")
    meta = {"beta": beta, "L": L, "precision": int(p), "bound": B}
    return PiecewiseInterpolant(geometry, values, spec, int(p), meta)


def deserialize(source):
    """Read from a path, bytes, or binary file object."""
    if isinstance(source, (bytes, bytearray, memoryview)):
        return from_bytes(source)
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return from_bytes(fh.read())
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return from_bytes(source.read())
    raise TypeError(f"cannot read PLIF data from {type(source).__name__}")
