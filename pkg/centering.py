# Gower double-centering: whole-matrix numpy reference and two-pass fused kernel
# centering.py

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from error_handling import ValidationRequiredError
from multi_threading import kernel_threads
from utils.constants import DEFAULT_TILE


@dataclass(frozen=True)
class CenteredMatrix:
    data: np.ndarray
    row_means: np.ndarray
    global_mean: float

    @property
    def n(self):
        return self.data.shape[0]


def require_validated(mat, skip_validation=False):
    """
    :raises ValidationRequiredError: If mat was never validated and no bypass was requested.
    """
    if not (mat.validated or skip_validation):
        raise ValidationRequiredError(
            "Matrix has not been validated; validate it first or pass skip_validation=True"
        )


def e_matrix(distance_matrix):
    return distance_matrix * distance_matrix / -2


def f_matrix(E_matrix):
    row_means = E_matrix.mean(axis=1)
    # Same reduction over the transpose: bitwise equal to row_means for symmetric input
    col_means = np.ascontiguousarray(E_matrix.T).mean(axis=1)
    matrix_mean = E_matrix.mean()
    return E_matrix - (row_means[:, np.newaxis] + col_means[np.newaxis, :]) + matrix_mean


def center_naive(mat, skip_validation=False):
    """
    Reference centering, one whole-matrix numpy operation at a time.

    :param mat: Validated DistanceMatrix.
    :param skip_validation: Accept an unvalidated matrix.
    :return: CenteredMatrix.
    """
    require_validated(mat, skip_validation)
    E = e_matrix(mat.data)
    centered = f_matrix(E)
    return CenteredMatrix(centered, E.mean(axis=1), float(E.mean()))


@njit(parallel=True, cache=True)
def _e_matrix_means(mat, centered, row_sums):
    n_samples = mat.shape[0]
    for row in prange(n_samples):
        row_sum = 0.0
        for col in range(n_samples):
            val = mat[row, col]
            val2 = -0.5 * val * val
            centered[row, col] = val2
            row_sum += val2
        row_sums[row] = row_sum


@njit(parallel=True, cache=True)
def _f_matrix_inplace(row_means, global_mean, centered, tile):
    n_samples = centered.shape[0]
    n_tiles = (n_samples + tile - 1) // tile
    # tiles keep a short run of row_means hot; they double as column means
    for t in prange(n_tiles):
        trow = t * tile
        trow_max = min(trow + tile, n_samples)
        for tcol in range(0, n_samples, tile):
            tcol_max = min(tcol + tile, n_samples)
            for row in range(trow, trow_max):
                gr_mean = global_mean - row_means[row]
                for col in range(tcol, tcol_max):
                    centered[row, col] = centered[row, col] + (gr_mean - row_means[col])


def center_fused_inplace(buffer, tile=DEFAULT_TILE, threads=None, source=None):
    """
    Centers into ``buffer`` in two passes.

    :param buffer: Writable C-contiguous n x n array; holds the distances on entry unless
        ``source`` is given, and the centered matrix on return.
    :param tile: Tile edge length for the second pass.
    :param threads: Worker count.
    :param source: Optional read-only distance buffer to read instead of ``buffer``.
    :return: (row_means, global_mean) of the E-matrix.
    """
    if tile < 1:
        raise ValueError(f"Tile size must be >= 1, got {tile}")
    n_samples = buffer.shape[0]
    source = buffer if source is None else source
    row_sums = np.empty(n_samples, dtype=np.float64)

    with kernel_threads(threads):
        _e_matrix_means(source, buffer, row_sums)
        # Row order reduction keeps the global mean independent of the thread count
        global_sum = _sum_in_order(row_sums)
        global_mean = (global_sum / n_samples) / n_samples
        row_means = row_sums / n_samples
        _f_matrix_inplace(row_means, global_mean, buffer, tile)
    return row_means, global_mean


@njit(cache=True)
def _sum_in_order(values):
    total = 0.0
    for i in range(values.shape[0]):
        total += values[i]
    return total


def center_fused(mat, tile=DEFAULT_TILE, threads=None, skip_validation=False):
    """
    Cache-friendly centering; matches center_naive within floating tolerance.

    :param mat: Validated DistanceMatrix.
    :param tile: Tile edge length.
    :param threads: Worker count.
    :param skip_validation: Accept an unvalidated matrix.
    :return: CenteredMatrix.
    """
    require_validated(mat, skip_validation)
    centered = np.empty_like(mat.data)
    row_means, global_mean = center_fused_inplace(centered, tile=tile, threads=threads, source=mat.data)
    logging.debug(f"Centered {mat.n}x{mat.n} matrix with tile={tile}, global mean {global_mean:.6g}.")
    return CenteredMatrix(centered, row_means, global_mean)
