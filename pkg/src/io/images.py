"""Static image emission: binary PGM previews with CSV twins.

A (rows, cols) array becomes a PGM of width ``cols`` and height ``rows``;
row 0 is the top line of both the PGM and the CSV.
"""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ..errors import DataIOError, InvalidParameterError

Scaling = Union[str, Tuple[float, float]]


def _range(array: np.ndarray, scaling: Scaling) -> Tuple[str, float, float]:
    if isinstance(scaling, str):
        if scaling != "minmax":
            raise InvalidParameterError("Unknown image scaling", scaling=scaling)
        return "minmax", float(array.min()), float(array.max())
    low, high = (float(v) for v in scaling)
    if not high > low:
        raise InvalidParameterError("Fixed range must be increasing", low=low, high=high)
    return "fixed", low, high


def quantize(array: np.ndarray, low: float, high: float, maxval: int) -> np.ndarray:
    if high <= low:
        return np.zeros(array.shape, dtype=np.int64)
    scaled = (np.asarray(array, dtype=float) - low) / (high - low)
    return np.rint(np.clip(scaled, 0.0, 1.0) * maxval).astype(np.int64)


def emit_image(
    array: np.ndarray,
    path: Union[str, Path],
    scaling: Scaling = "minmax",
    bits: int = 8,
) -> Path:
    """
    Write ``<path>.pgm``, ``<path>.csv`` and ``<path>.scaling.txt``.

    Args:
        array: 2D image
        path: output path without extension
        scaling: ``"minmax"`` or a fixed ``(low, high)`` range
        bits: 8 or 16 bit grey levels

    Returns:
        Path of the PGM file
    """
    array = np.asarray(array)
    if array.ndim != 2:
        raise InvalidParameterError("Images must be two-dimensional", shape=array.shape)
    if bits not in (8, 16):
        raise InvalidParameterError("PGM depth must be 8 or 16 bits", bits=bits)

    mode, low, high = _range(array, scaling)
    maxval = (1 << bits) - 1
    pixels = quantize(array, low, high, maxval)
    rows, cols = array.shape
    header = f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii")
    body = pixels.astype(">u2" if bits == 16 else "u1").tobytes()

    base = Path(path)
    pgm = base.with_suffix(".pgm")
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        pgm.write_bytes(header + body)
        np.savetxt(base.with_suffix(".csv"), np.asarray(array, dtype=np.float32), fmt="%.9g", delimiter=",")
        base.with_suffix(".scaling.txt").write_text(
            f"scaling {mode}\nlow {low!r}\nhigh {high!r}\nmaxval {maxval}\n", encoding="utf-8"
        )
    except OSError as e:
        raise DataIOError(f"Cannot write image: {e}", path=str(base)) from e
    return pgm


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """Grey levels of a binary PGM written by ``emit_image``"""
    try:
        payload = Path(path).read_bytes()
    except OSError as e:
        raise DataIOError(f"Cannot read image: {e}", path=str(path)) from e
    parts = payload.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise DataIOError("Not a binary PGM", path=str(path))
    cols, rows = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(parts[3], dtype=dtype, count=rows * cols).reshape(rows, cols).astype(np.int64)


def read_csv_image(path: Union[str, Path], dtype: Optional[np.dtype] = np.float32) -> np.ndarray:
    try:
        return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=dtype))
    except OSError as e:
        raise DataIOError(f"Cannot read image: {e}", path=str(path)) from e
