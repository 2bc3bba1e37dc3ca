"""Binary K×N matrix container (``.sfbl``).

Layout, little-endian::

    magic    4 bytes   b"SFBL"
    version  uint32    1
    scalar   uint32    0 = float32, 1 = float64
    K        uint32
    N        uint32
    payload  K*N scalars, row-major (all frames of state 0, then state 1, ...)

The same container carries log-likelihoods, posteriors and gradients.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .errors import LikelihoodFormatError

MAGIC = b"SFBL"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")
_SCALARS = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}


def dumps_matrix(values: np.ndarray, dtype=np.float64) -> bytes:
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError(f"expected a K×N matrix, got shape {values.shape}")
    code = _CODES.get(np.dtype(dtype))
    if code is None:
        raise ValueError(f"unsupported scalar type {dtype}")
    if np.isnan(values).any():
        raise LikelihoodFormatError("refusing to write NaN scalars")
    K, N = values.shape
    payload = np.ascontiguousarray(values, dtype=_SCALARS[code]).tobytes()
    return _HEADER.pack(MAGIC, VERSION, code, K, N) + payload


def loads_matrix(data: bytes) -> np.ndarray:
    """Decode a container; returns a K×N array in the stored scalar type (native byte order)."""
    if len(data) < _HEADER.size:
        raise LikelihoodFormatError(f"truncated header ({len(data)} bytes)")
    magic, version, code, K, N = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise LikelihoodFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise LikelihoodFormatError(f"unsupported format version {version}")
    if code not in _SCALARS:
        raise LikelihoodFormatError(f"unknown scalar code {code}")
    dt = _SCALARS[code]
    expected = K * N * dt.itemsize
    payload = data[_HEADER.size :]
    if len(payload) != expected:
        raise LikelihoodFormatError(f"payload is {len(payload)} bytes, header promises {expected}")
    values = np.frombuffer(payload, dtype=dt).reshape(K, N).astype(dt.newbyteorder("="))
    if np.isnan(values).any():
        raise LikelihoodFormatError("container holds NaN scalars")
    return values


def write_matrix(path_or_file: str | BinaryIO, values: np.ndarray, dtype=np.float64) -> None:
    data = dumps_matrix(values, dtype)
    if hasattr(path_or_file, "write"):
        path_or_file.write(data)
    else:
        with open(path_or_file, "wb") as fh:
            fh.write(data)


def read_matrix(path_or_file: str | BinaryIO) -> np.ndarray:
    if hasattr(path_or_file, "read"):
        return loads_matrix(path_or_file.read())
    with open(path_or_file, "rb") as fh:
        return loads_matrix(fh.read())
