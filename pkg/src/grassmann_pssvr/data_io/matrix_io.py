"""Matrix persistence: CSV text and the GMX1 binary format.

GMX1 layout, all little-endian::

    b"GMX1" | u64 rows | u64 cols | rows * cols float64, row-major
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from ..errors import DataFormatError

MAGIC = b"GMX1"
_HEADER = struct.Struct("<4sQQ")


def _check_finite(a, path):
    if not np.all(np.isfinite(a)):
        raise DataFormatError(f"{path}: matrix contains non-finite values")


def to_gmx_bytes(matrix) -> bytes:
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return _HEADER.pack(MAGIC, a.shape[0], a.shape[1]) + np.ascontiguousarray(a, dtype="<f8").tobytes()


def from_gmx_bytes(data: bytes, path="<bytes>") -> np.ndarray:
    if len(data) < _HEADER.size:
        raise DataFormatError(f"{path}: truncated GMX1 header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise DataFormatError(f"{path}: payload is {len(data)} bytes, expected {expected}")
    a = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(rows, cols).astype(np.float64)
    _check_finite(a, path)
    return a


def to_csv_text(matrix) -> str:
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    buf = io.StringIO()
    # shape line keeps 0 x n and n x 0 matrices round-trippable
    buf.write(f"# {a.shape[0]} {a.shape[1]}\n")
    for row in a:
        buf.write(",".join(f"{v:.17g}" for v in row))
        buf.write("\n")
    return buf.getvalue()


def from_csv_text(text: str, path="<text>") -> np.ndarray:
    lines = text.splitlines()
    shape = None
    if lines and lines[0].startswith("#"):
        try:
            rows, cols = (int(t) for t in lines[0][1:].split())
        except ValueError as exc:
            raise DataFormatError(f"{path}: malformed shape line {lines[0]!r}") from exc
        shape = (rows, cols)
        lines = lines[1:]
        if cols == 0 and not any(ln.strip() for ln in lines):
            return np.zeros(shape)
    lines = [ln for ln in lines if ln.strip()]
    try:
        data = [[float(t) for t in ln.split(",")] for ln in lines]
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if shape is None:
        shape = (len(data), len(data[0]) if data else 0)
    if len(data) != shape[0] or any(len(row) != shape[1] for row in data):
        raise DataFormatError(f"{path}: rows do not match declared shape {shape}")
    a = np.array(data, dtype=np.float64).reshape(shape)
    _check_finite(a, path)
    return a


def save_matrix(path, matrix, fmt: str | None = None) -> Path:
    """Write ``matrix`` as GMX1 (``.gmx``) or CSV (``.csv``, the fallback)."""
    path = Path(path)
    fmt = fmt or ("gmx" if path.suffix == ".gmx" else "csv")
    _check_finite(np.asarray(matrix, dtype=np.float64), path)
    if fmt == "gmx":
        path.write_bytes(to_gmx_bytes(matrix))
    elif fmt == "csv":
        path.write_text(to_csv_text(matrix))
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    return path


def load_matrix(path, fmt: str | None = None) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    if fmt is None:
        fmt = "gmx" if raw[:4] == MAGIC else "csv"
    if fmt == "gmx":
        return from_gmx_bytes(raw, path)
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: not a CSV text file") from exc
    return from_csv_text(text, path)
