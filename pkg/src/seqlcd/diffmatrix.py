"""Reference x query Euclidean distance matrix.

Rows index reference frames, columns index query frames. Columns may be
computed incrementally; validity is tracked explicitly so an uncomputed
entry can never masquerade as a zero distance.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backend import get_kernels
from .descriptor import DescriptorSet
from .errors import (
    BadMagic,
    DimMismatch,
    RangeOutOfBounds,
    TruncatedFile,
    UncomputedEntry,
    UnsupportedVersion,
)

SQDM_MAGIC = b"SQDM"
SQDM_VERSION = 1


@dataclass
class DifferenceMatrix:
    """Distance matrix with per-column validity.

    ``data`` is (rows, cols) float32; ``computed`` is a bool mask over
    columns. Entries in uncomputed columns hold zeros and must not be read
    directly — use :func:`entry` or check ``computed`` first.
    """

    data: np.ndarray
    computed: np.ndarray

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def computed_cols(self) -> np.ndarray:
        return np.flatnonzero(self.computed)

    def all_computed(self) -> bool:
        return bool(self.computed.all())


def _check_dims(reference: DescriptorSet, query: DescriptorSet) -> None:
    if reference.dim != query.dim:
        raise DimMismatch(f"reference dim {reference.dim} != query dim {query.dim}")


def _empty(reference: DescriptorSet, query: DescriptorSet) -> DifferenceMatrix:
    data = np.zeros((reference.count, query.count), dtype=np.float32)
    return DifferenceMatrix(data, np.zeros(query.count, dtype=bool))


def _compute_columns(
    reference: DescriptorSet,
    query: DescriptorSet,
    matrix: DifferenceMatrix,
    cols: np.ndarray,
    threads: int,
    kernels,
) -> None:
    if len(cols) == 0:
        return
    if threads <= 1 or len(cols) < 2 * threads:
        kernels.dist_columns(reference.values, query.values, matrix.data, cols)
    else:
        chunks = np.array_split(cols, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(kernels.dist_columns, reference.values, query.values, matrix.data, c)
                for c in chunks
                if len(c)
            ]
            for f in futures:
                f.result()
    matrix.computed[cols] = True


def build_full(
    reference: DescriptorSet,
    query: DescriptorSet,
    threads: int = 1,
    kernels=None,
) -> DifferenceMatrix:
    """Compute every column of the reference x query distance matrix."""
    _check_dims(reference, query)
    kernels = kernels or get_kernels()
    matrix = _empty(reference, query)
    cols = np.arange(query.count, dtype=np.intp)
    _compute_columns(reference, query, matrix, cols, threads, kernels)
    return matrix


def build_columns(
    reference: DescriptorSet,
    query: DescriptorSet,
    col_range: range,
    existing: DifferenceMatrix | None = None,
    threads: int = 1,
    kernels=None,
) -> DifferenceMatrix:
    """Compute the given query columns, preserving previously computed ones.

    ``existing`` is extended in place when supplied (single writer); a new
    matrix is allocated otherwise.
    """
    _check_dims(reference, query)
    kernels = kernels or get_kernels()
    matrix = existing if existing is not None else _empty(reference, query)
    if matrix.data.shape != (reference.count, query.count):
        raise DimMismatch(
            f"existing matrix is {matrix.data.shape}, sets give "
            f"({reference.count}, {query.count})"
        )
    cols = np.asarray(list(col_range), dtype=np.intp)
    if len(cols) and (cols.min() < 0 or cols.max() >= query.count):
        raise RangeOutOfBounds(f"column range {col_range} outside [0, {query.count})")
    _compute_columns(reference, query, matrix, cols, threads, kernels)
    return matrix


def entry(matrix: DifferenceMatrix, i: int, j: int) -> float:
    """Distance at (reference i, query j); demands the column was computed."""
    if not (0 <= i < matrix.rows and 0 <= j < matrix.cols):
        raise RangeOutOfBounds(f"({i}, {j}) outside {matrix.rows}x{matrix.cols}")
    if not matrix.computed[j]:
        raise UncomputedEntry(f"column {j} was never computed")
    return float(matrix.data[i, j])


def save_matrix(matrix: DifferenceMatrix, path) -> None:
    """Dump to a flat binary file for debugging and cross-implementation diffs."""
    parts = [
        SQDM_MAGIC,
        struct.pack("<III", SQDM_VERSION, matrix.rows, matrix.cols),
        matrix.computed.astype(np.uint8).tobytes(),
        np.ascontiguousarray(matrix.data, dtype="<f4").tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))


def load_matrix(path) -> DifferenceMatrix:
    buf = Path(path).read_bytes()
    if len(buf) < 4 or buf[:4] != SQDM_MAGIC:
        raise BadMagic(f"{path}: not a difference-matrix file")
    if len(buf) < 16:
        raise TruncatedFile(f"{path}: missing header")
    version, rows, cols = struct.unpack("<III", buf[4:16])
    if version != SQDM_VERSION:
        raise UnsupportedVersion(f"{path}: version {version}")
    off = 16
    if len(buf) < off + cols:
        raise TruncatedFile(f"{path}: missing column validity bitmap")
    computed = np.frombuffer(buf[off : off + cols], dtype=np.uint8).astype(bool)
    off += cols
    need = 4 * rows * cols
    if len(buf) < off + need:
        raise TruncatedFile(f"{path}: matrix data has {len(buf) - off} of {need} bytes")
    data = np.frombuffer(buf[off : off + need], dtype="<f4").reshape(rows, cols).copy()
    return DifferenceMatrix(data, computed.copy())
