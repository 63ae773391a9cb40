"""DOTB binary array container.

Layout (little-endian): 4-byte magic ``DOTB``, u8 version, u8 dtype code
(1 = float32, 2 = float64), u16 rank, ``rank`` u32 dims, then the row-major
payload.
"""

import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..errors import DataIOError

MAGIC = b"DOTB"
VERSION = 1
_DTYPES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODES = {np.dtype("float32"): 1, np.dtype("float64"): 2}

PathLike = Union[str, Path]


def _dtype_code(dtype: np.dtype) -> int:
    try:
        return _CODES[np.dtype(dtype)]
    except KeyError:
        raise DataIOError("Only float32 and float64 arrays can be stored", dtype=str(dtype)) from None


def encode_array(array: np.ndarray) -> bytes:
    array = np.asarray(array)
    code = _dtype_code(array.dtype)
    header = MAGIC + struct.pack("<BBH", VERSION, code, array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    return header + np.ascontiguousarray(array, dtype=_DTYPES[code]).tobytes()


def decode_array(payload: bytes, source: str = "<bytes>") -> np.ndarray:
    if len(payload) < 8 or payload[:4] != MAGIC:
        raise DataIOError("Not a DOTB file", path=source)
    version, code, rank = struct.unpack("<BBH", payload[4:8])
    if version != VERSION:
        raise DataIOError("Unsupported DOTB version", path=source, version=version)
    if code not in _DTYPES:
        raise DataIOError("Unknown DOTB dtype code", path=source, code=code)
    offset = 8 + 4 * rank
    if len(payload) < offset:
        raise DataIOError("Truncated DOTB header", path=source)
    dims = struct.unpack(f"<{rank}I", payload[8:offset])
    dtype = _DTYPES[code]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(payload) - offset != expected:
        raise DataIOError("DOTB payload size mismatch", path=source, expected=expected, got=len(payload) - offset)
    return np.frombuffer(payload, dtype=dtype, offset=offset).reshape(dims).astype(dtype.newbyteorder("="))


def write_array(path: PathLike, array: np.ndarray) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_array(array))
    except OSError as e:
        raise DataIOError(f"Cannot write array: {e}", path=str(path)) from e
    return path


def read_array(path: PathLike) -> np.ndarray:
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise DataIOError(f"Cannot read array: {e}", path=str(path)) from e
    return decode_array(payload, str(path))


def read_header(path: PathLike) -> Tuple[np.dtype, Tuple[int, ...]]:
    """Dtype and dims of a stored array without loading its payload"""
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            head = handle.read(8)
            if len(head) < 8 or head[:4] != MAGIC:
                raise DataIOError("Not a DOTB file", path=str(path))
            _, code, rank = struct.unpack("<BBH", head[4:8])
            dims = struct.unpack(f"<{rank}I", handle.read(4 * rank))
    except OSError as e:
        raise DataIOError(f"Cannot read array: {e}", path=str(path)) from e
    except struct.error as e:
        raise DataIOError("Truncated DOTB header", path=str(path)) from e
    if code not in _DTYPES:
        raise DataIOError("Unknown DOTB dtype code", path=str(path), code=code)
    return _DTYPES[code], tuple(dims)
