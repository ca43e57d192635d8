# Distance-matrix type, symmetric/hollow validation, condensed indexing and permutation tables
# distmat.py

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from numba import njit, prange

from error_handling import DimensionError, LabelError, NotSymmetricHollowError, PreconditionError
from multi_threading import kernel_threads, resolve_thread_count, run_chunked
from utils.constants import DEFAULT_ATOL, DEFAULT_PRECISION, DEFAULT_TILE, PERMUTATION_CHUNK_ROWS
from utils.helpers import resolve_dtype


@dataclass(frozen=True)
class ValidationReport:
    is_symmetric: bool
    is_hollow: bool
    first_violation: Optional[Tuple[int, int]] = None

    @property
    def passed(self):
        return self.is_symmetric and self.is_hollow


@dataclass(frozen=True)
class CondensedVector:
    """Strict upper triangle of an n x n matrix, flattened row by row."""
    n: int
    values: np.ndarray

    def __post_init__(self):
        expected = self.n * (self.n - 1) // 2
        if self.values.ndim != 1 or self.values.shape[0] != expected:
            raise DimensionError(f"Condensed vector for n={self.n} needs {expected} values, got {self.values.shape}")

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class PermutationSet:
    k: int
    n: int
    order: np.ndarray = field(repr=False)
    seed: Optional[int] = None

    def __post_init__(self):
        if self.order.shape != (self.k, self.n):
            raise DimensionError(f"Permutation table must be {self.k}x{self.n}, got {self.order.shape}")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """
    Dense n x n distance matrix with sample labels.

    The buffer is read-only once constructed. ``validated`` records that the symmetric and
    hollow checks passed, so copies do not have to scan the buffer again.
    """
    data: np.ndarray = field(repr=False)
    ids: Tuple[str, ...]
    validated: bool = False

    def __post_init__(self):
        _check_square(self.data)
        if len(self.ids) != self.data.shape[0]:
            raise DimensionError(f"Got {len(self.ids)} ids for a {self.data.shape[0]}x{self.data.shape[0]} matrix")
        if len(set(self.ids)) != len(self.ids):
            duplicates = sorted(i for i, count in Counter(self.ids).items() if count > 1)
            raise LabelError(f"Duplicate ids: {', '.join(duplicates)}")
        self.data.flags.writeable = False

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def dtype(self):
        return self.data.dtype

    @classmethod
    def from_buffer(cls, data, ids=None, validate=True, tile=DEFAULT_TILE, precision=DEFAULT_PRECISION,
                    atol=DEFAULT_ATOL, threads=None):
        """
        Builds a matrix from any array-like buffer.

        :param data: n x n array-like of distances.
        :param ids: Sample labels; defaults to "0".."n-1".
        :param validate: If True, run the tiled validator and mark the result validated.
        :param tile: Tile size for validation.
        :param precision: 'f64' or 'f32'.
        :param atol: Absolute tolerance for the symmetric/hollow checks.
        :param threads: Worker count for validation.
        :raises NotSymmetricHollowError: If validation is requested and fails.
        """
        buffer = np.array(data, dtype=resolve_dtype(precision), order='C', copy=True)
        _check_square(buffer)
        ids = tuple(str(i) for i in range(buffer.shape[0])) if ids is None else tuple(ids)
        mat = cls(buffer, ids)
        if not validate:
            return mat
        report = validate_tiled(mat.data, tile=tile, atol=atol, threads=threads)
        if not report.passed:
            raise NotSymmetricHollowError(report)
        return mark_validated(mat, report)

    def copy(self):
        """Copies the buffer; the validated flag carries over without another scan."""
        return DistanceMatrix(self.data.copy(), self.ids, self.validated)

    def condensed_form(self):
        return condensed_form(self)

    def permute(self, order, condensed=False):
        return permute(self, order, condensed=condensed)


def _check_square(data):
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise DimensionError(f"Expected a square 2-D buffer, got shape {data.shape}")
    if data.shape[0] < 1:
        raise DimensionError("A distance matrix needs at least one sample")


def mark_validated(mat, report):
    """
    Returns the same matrix flagged as validated.

    :param mat: DistanceMatrix whose buffer produced ``report``.
    :param report: A passing ValidationReport.
    :raises NotSymmetricHollowError: If the report did not pass.
    """
    if not report.passed:
        raise NotSymmetricHollowError(report)
    return replace(mat, validated=True)


def is_validated(mat):
    return bool(mat.validated)


def _as_buffer(mat):
    data = mat.data if isinstance(mat, DistanceMatrix) else np.asarray(mat)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise DimensionError(f"Expected a square 2-D buffer, got shape {data.shape}")
    return data


# Reference validation: whole-matrix passes
def validate_naive(mat, atol=DEFAULT_ATOL):
    """
    Checks symmetry against the full transpose and hollowness element by element.
    NaN and infinite entries always count as violations.

    :param mat: Square buffer or DistanceMatrix.
    :param atol: Absolute tolerance; 0 means exact equality.
    :return: ValidationReport.
    :raises DimensionError: If the buffer is not square.
    """
    data = _as_buffer(mat)
    not_sym = ~(np.abs(data - data.T) <= atol)
    not_hollow = ~(np.abs(np.diagonal(data)) <= atol)
    is_symmetric = not not_sym.any()
    is_hollow = not not_hollow.any()

    first_violation = None
    if not is_symmetric:
        row, col = np.argwhere(not_sym)[0]
        first_violation = (int(row), int(col))
    elif not is_hollow:
        idx = int(np.flatnonzero(not_hollow)[0])
        first_violation = (idx, idx)
    return ValidationReport(bool(is_symmetric), bool(is_hollow), first_violation)


def _scan_tile_rows(mat, tile, atol, sym_ok, hollow_ok, violations):
    n = mat.shape[0]
    n_tiles = sym_ok.shape[0]
    for t in prange(n_tiles):
        trow = t * tile
        trow_max = min(trow + tile, n)
        is_sym = True
        is_hollow = True
        for tcol in range(0, n, tile):
            tcol_max = min(tcol + tile, n)
            for row in range(trow, trow_max):
                for col in range(tcol, tcol_max):
                    if not (abs(mat[row, col] - mat[col, row]) <= atol):
                        if is_sym and is_hollow:
                            violations[t, 0] = row
                            violations[t, 1] = col
                        is_sym = False
            if trow == tcol:  # diagonal block
                for col in range(tcol, tcol_max):
                    if not (abs(mat[col, col]) <= atol):
                        if is_sym and is_hollow:
                            violations[t, 0] = col
                            violations[t, 1] = col
                        is_hollow = False
        sym_ok[t] = is_sym
        hollow_ok[t] = is_hollow


_scan_tile_rows_parallel = njit(parallel=True, cache=True)(_scan_tile_rows)


@njit(cache=True)
def _scan_tiles_serial(mat, tile, atol):
    n = mat.shape[0]
    is_sym = True
    is_hollow = True
    first_row = -1
    first_col = -1
    for trow in range(0, n, tile):
        trow_max = min(trow + tile, n)
        for tcol in range(0, n, tile):
            tcol_max = min(tcol + tile, n)
            if is_sym:
                for row in range(trow, trow_max):
                    for col in range(tcol, tcol_max):
                        if not (abs(mat[row, col] - mat[col, row]) <= atol):
                            if is_hollow:
                                first_row = row
                                first_col = col
                            is_sym = False
                            break
                    if not is_sym:
                        break
            if trow == tcol and is_hollow:  # diagonal block
                for col in range(tcol, tcol_max):
                    if not (abs(mat[col, col]) <= atol):
                        if is_sym:
                            first_row = col
                            first_col = col
                        is_hollow = False
                        break
            if not is_sym and not is_hollow:
                return is_sym, is_hollow, first_row, first_col
    return is_sym, is_hollow, first_row, first_col


# Optimized validation: tiled, symmetry and diagonal checks fused
def validate_tiled(mat, tile=DEFAULT_TILE, atol=DEFAULT_ATOL, threads=None):
    """
    Tiled symmetric/hollow check. Gives the same flags as validate_naive for every tile size.

    Single-threaded runs stop comparing once a violation is known; parallel runs scan every
    tile-row and reduce the per-tile-row flags.

    :param mat: Square buffer or DistanceMatrix.
    :param tile: Tile edge length (>= 1).
    :param atol: Absolute tolerance; 0 means exact equality.
    :param threads: Worker count (None = configured default, 0 = all).
    :return: ValidationReport.
    """
    data = np.ascontiguousarray(_as_buffer(mat))
    if tile < 1:
        raise ValueError(f"Tile size must be >= 1, got {tile}")
    n = data.shape[0]

    if resolve_thread_count(threads) == 1:
        is_sym, is_hollow, row, col = _scan_tiles_serial(data, tile, atol)
        first_violation = None if row < 0 else (int(row), int(col))
        return ValidationReport(bool(is_sym), bool(is_hollow), first_violation)

    n_tiles = (n + tile - 1) // tile
    sym_ok = np.ones(n_tiles, dtype=np.bool_)
    hollow_ok = np.ones(n_tiles, dtype=np.bool_)
    violations = np.full((n_tiles, 2), -1, dtype=np.int64)
    with kernel_threads(threads):
        _scan_tile_rows_parallel(data, tile, atol, sym_ok, hollow_ok, violations)

    first_violation = None
    bad = np.flatnonzero(~(sym_ok & hollow_ok))
    if bad.size:
        row, col = violations[bad[0]]
        first_violation = (int(row), int(col))
    return ValidationReport(bool(sym_ok.all()), bool(hollow_ok.all()), first_violation)


def condensed_index(row, col, n):
    """
    Position of (row, col), row < col, in the condensed vector of an n x n matrix.

    :raises PreconditionError: Unless 0 <= row < col < n.
    """
    if not 0 <= row < col < n:
        raise PreconditionError(f"condensed_index needs 0 <= row < col < n, got row={row}, col={col}, n={n}")
    return row * (n - 1) - (row * (row - 1)) // 2 + (col - row - 1)


def condensed_pairs(n):
    """(rows, cols) of the strict upper triangle, in condensed order."""
    return np.triu_indices(n, k=1)


def condensed_form(mat):
    """
    Flattens the strict upper triangle of a matrix row by row.

    :param mat: DistanceMatrix (validated, or deliberately used unvalidated by the caller).
    :return: CondensedVector.
    """
    data = _as_buffer(mat)
    rows, cols = condensed_pairs(data.shape[0])
    return CondensedVector(data.shape[0], np.ascontiguousarray(data[rows, cols]))


def from_condensed(vector, ids=None):
    """
    Rebuilds the full symmetric hollow matrix of a condensed vector.

    :param vector: CondensedVector.
    :param ids: Sample labels for the new matrix.
    :return: Unvalidated DistanceMatrix.
    """
    data = np.zeros((vector.n, vector.n), dtype=vector.values.dtype)
    rows, cols = condensed_pairs(vector.n)
    data[rows, cols] = vector.values
    data[cols, rows] = vector.values
    ids = tuple(str(i) for i in range(vector.n)) if ids is None else tuple(ids)
    return DistanceMatrix(data, ids)


def permute(mat, order, condensed=False):
    """
    Reorders rows and columns together: result[i][j] = data[order[i]][order[j]].

    :param mat: DistanceMatrix.
    :param order: Permutation of 0..n-1.
    :param condensed: If True, return only the condensed vector of the permuted matrix.
    :return: New unvalidated DistanceMatrix (ids follow the order), or a CondensedVector.
    """
    order = np.asarray(order, dtype=np.intp)
    if order.shape != (mat.n,):
        raise DimensionError(f"Permutation of length {order.shape} does not match n={mat.n}")
    permuted = mat.data[np.ix_(order, order)]
    if condensed:
        return condensed_form(permuted)
    return DistanceMatrix(permuted, tuple(mat.ids[i] for i in order))


# Permutation tables for the Monte-Carlo null
def make_permutations(n, k, seed, threads=None):
    """
    Draws k independent uniform permutations of 0..n-1 (with replacement from the permutation group).

    Rows are produced in fixed-size chunks, each from its own child stream of the seed, so the
    table depends only on (n, k, seed) and never on the worker count.

    :param n: Permutation length (>= 1).
    :param k: Number of permutations (>= 0).
    :param seed: Integer seed.
    :param threads: Worker count for generation.
    :return: PermutationSet.
    """
    if n < 1:
        raise DimensionError(f"Permutation length must be >= 1, got {n}")
    if k < 0:
        raise ValueError(f"Permutation count must be >= 0, got {k}")

    order = np.empty((k, n), dtype=np.intp)
    starts = list(range(0, k, PERMUTATION_CHUNK_ROWS))
    streams = np.random.SeedSequence(seed).spawn(len(starts))

    def fill_chunk(index):
        rng = np.random.default_rng(streams[index])
        start = starts[index]
        for row in range(start, min(start + PERMUTATION_CHUNK_ROWS, k)):
            order[row] = rng.permutation(n)

    run_chunked(fill_chunk, range(len(starts)), max_workers=threads)
    logging.debug(f"Generated {k} permutations of length {n} from seed {seed}.")
    return PermutationSet(k, n, order, seed)
