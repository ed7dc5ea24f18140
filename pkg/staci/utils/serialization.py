"""
Binary blob helpers.

Blobs are little-endian: an 8-byte magic, a uint32 format version, a 32-byte
config hash, then payload sections written by the caller.
"""

import struct
from typing import Tuple

import numpy as np

from .errors import DataError

FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sI32s")


def pack_header(magic: bytes, digest: bytes) -> bytes:
    """Pack the common blob header."""
    if len(magic) != 8 or len(digest) != 32:
        raise ValueError("magic must be 8 bytes and digest 32 bytes")
    return _HEADER.pack(magic, FORMAT_VERSION, digest)


def unpack_header(blob: bytes, magic: bytes, offset: int = 0) -> Tuple[bytes, int]:
    """
    Validate a blob header.

    Returns:
        (config digest, offset of the first payload byte)
    """
    if len(blob) < offset + _HEADER.size:
        raise DataError("blob is truncated")
    found, version, digest = _HEADER.unpack_from(blob, offset)
    if found != magic:
        raise DataError(f"bad magic {found!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported blob version {version}")
    return digest, offset + _HEADER.size


def pack_array(values: np.ndarray) -> bytes:
    """Length-prefixed little-endian float64 array."""
    flat = np.ascontiguousarray(values, dtype="<f8").ravel()
    return struct.pack("<Q", flat.size) + flat.tobytes()


def unpack_array(blob: bytes, offset: int) -> Tuple[np.ndarray, int]:
    """Read an array written by :func:`pack_array`."""
    if len(blob) < offset + 8:
        raise DataError("blob is truncated")
    (count,) = struct.unpack_from("<Q", blob, offset)
    offset += 8
    end = offset + 8 * count
    if len(blob) < end:
        raise DataError("blob is truncated")
    values = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).astype(np.float64)
    return values, end


def pack_bytes(payload: bytes) -> bytes:
    """Length-prefixed byte string."""
    return struct.pack("<Q", len(payload)) + payload


def unpack_bytes(blob: bytes, offset: int) -> Tuple[bytes, int]:
    """Read a byte string written by :func:`pack_bytes`."""
    if len(blob) < offset + 8:
        raise DataError("blob is truncated")
    (length,) = struct.unpack_from("<Q", blob, offset)
    offset += 8
    if len(blob) < offset + length:
        raise DataError("blob is truncated")
    return blob[offset:offset + length], offset + length
