"""Matrix/vector files and CSV emission.

Binary format (little-endian)::

    offset 0   4 bytes   magic b"PLAB"
    offset 4   u32       rows
    offset 8   u32       cols
    offset 12  f64[rows*cols]  entries, column-major

A vector of length n is stored as an n x 1 matrix. The text alternative is
CSV with one matrix row per line and no header; floats are written with
``repr`` so they round-trip exactly. Readers detect the format from the
magic bytes.
"""

from __future__ import annotations

import csv
import math
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .linalg import as_matrix, as_vector

MAGIC = b"PLAB"
_HEADER = struct.Struct("<4sII")


def write_binary(path, A) -> None:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    rows, cols = A.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(np.asarray(A, dtype="<f8").tobytes(order="F"))


def read_binary(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: file too short for a PLAB header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for a {rows}x{cols} matrix, found {len(data)}")
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    return flat.reshape((rows, cols), order="F").astype(np.float64)


def write_csv_matrix(path, A) -> None:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in A:
            w.writerow([repr(float(v)) for v in row])


def read_csv_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged CSV rows")
    return np.array(rows, dtype=np.float64)


def _is_binary(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC


def load_matrix(path) -> np.ndarray:
    raw = read_binary(path) if _is_binary(path) else read_csv_matrix(path)
    return as_matrix(raw)


def load_vector(path) -> np.ndarray:
    raw = read_binary(path) if _is_binary(path) else read_csv_matrix(path)
    if 1 not in raw.shape:
        raise ValueError(f"{path}: expected a vector, found a {raw.shape[0]}x{raw.shape[1]} matrix")
    return as_vector(raw.reshape(-1))


def save_array(path, A, fmt: str | None = None) -> None:
    """Write ``A`` as PLAB binary, or CSV when ``fmt == "csv"`` or the path ends in ``.csv``."""
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "binary"
    if fmt == "csv":
        write_csv_matrix(path, A)
    elif fmt == "binary":
        write_binary(path, A)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Deterministic CSV: fixed header, ``repr`` floats, empty cells for NaN."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])
