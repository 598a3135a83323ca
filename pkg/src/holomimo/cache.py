"""Binary cache for assembled matrices, keyed by content hash.

File format: an ASCII magic ``HMXC``, a little-endian uint32 version,
a uint32 rank, that many uint64 dimensions, then the matrix payload as
row-major little-endian complex doubles.
"""

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import CacheError

MAGIC = b"HMXC"
VERSION = 1


def _canonical(part):
    """Stable byte encoding of a key component."""
    if isinstance(part, str):
        return part.encode()
    if isinstance(part, (int, np.integer)):
        return f"i{int(part)}".encode()
    if isinstance(part, (float, np.floating)):
        return float(part).hex().encode()
    if isinstance(part, np.ndarray):
        arr = np.ascontiguousarray(part)
        return arr.dtype.str.encode() + str(arr.shape).encode() + arr.tobytes()
    if isinstance(part, (tuple, list)):
        return b"(" + b",".join(_canonical(p) for p in part) + b")"
    raise TypeError(f"cannot build a cache key from {type(part)!r}")


def write_matrix(path, matrix):
    """Write a complex matrix in the cache's binary format."""
    matrix = np.ascontiguousarray(matrix, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, matrix.ndim))
        fh.write(struct.pack(f"<{matrix.ndim}Q", *matrix.shape))
        fh.write(matrix.astype("<c16", copy=False).tobytes())


def read_matrix(path):
    """Read a matrix written by :func:`write_matrix`.

    Raises
    ------
    CacheError
        On a bad magic, unsupported version, or truncated payload.
    """
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise CacheError(f"bad magic {magic!r} in {path}")
        version, ndim = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise CacheError(f"unsupported cache version {version}")
        shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        payload = fh.read()
    expected = int(np.prod(shape)) * 16
    if len(payload) != expected:
        raise CacheError(
            f"truncated cache file {path}: {len(payload)} of {expected} bytes"
        )
    return np.frombuffer(payload, dtype="<c16").reshape(shape).astype(
        np.complex128
    )


class MatrixCache:
    """Directory-backed cache of assembled matrices."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def key(self, *parts):
        """Content hash of the defining parameters."""
        digest = hashlib.sha256()
        for part in parts:
            digest.update(_canonical(part))
            digest.update(b"|")
        return digest.hexdigest()

    def _path(self, key):
        return self.directory / f"{key}.hmxc"

    def load(self, key):
        """Cached matrix for ``key``, or ``None`` on a miss."""
        path = self._path(key)
        if not path.exists():
            return None
        return read_matrix(path)

    def store(self, key, matrix):
        write_matrix(self._path(key), matrix)

    def clear(self):
        """Delete every cache file; returns the number removed."""
        removed = 0
        for path in self.directory.glob("*.hmxc"):
            path.unlink()
            removed += 1
        return removed
