import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from centering import center_fused, center_naive
from error_handling import DimensionError, EigensolverError
from utils.constants import DEFAULT_EIGENSOLVER, DEFAULT_TILE, EIGENVALUE_ZERO_RTOL, PCOA_MIN_SAMPLES


@dataclass(frozen=True)
class PcoaResult:
    eigenvalues: np.ndarray
    coordinates: np.ndarray
    proportion_explained: np.ndarray
    negative_eigenvalue_warning: bool
    ids: Tuple[str, ...] = ()

    @property
    def axes(self):
        return self.coordinates.shape[1]


# Dense exact symmetric eigensolver
def dense_eigh(centered):
    """
    Full eigendecomposition of a symmetric matrix.

    :param centered: n x n symmetric array.
    :return: (eigenvalues, eigenvectors) in any order; eigenvectors are columns.
    """
    try:
        return scipy.linalg.eigh(centered, check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError('dense', str(e)) from e


# Registry of eigensolver backends, keyed by name
EIGENSOLVERS = {
    'dense': dense_eigh,
}


def register_eigensolver(name, solver):
    """
    Adds an eigensolver backend.

    :param name: Name used to select the backend.
    :param solver: Callable mapping a symmetric array to (eigenvalues, eigenvectors as columns).
    """
    EIGENSOLVERS[name] = solver


def pcoa(mat, axes=None, tile=DEFAULT_TILE, threads=None, naive=False, eigensolver=DEFAULT_EIGENSOLVER,
         skip_validation=False):
    """
    Principal coordinates analysis of a distance matrix.

    :param mat: Validated DistanceMatrix with n >= 2.
    :param axes: Maximum number of axes to keep; None keeps every positive-eigenvalue axis.
    :param tile: Tile size for centering.
    :param threads: Worker count for centering.
    :param naive: Center with the reference implementation instead of the fused kernel.
    :param eigensolver: Name of a registered eigensolver backend.
    :param skip_validation: Accept an unvalidated matrix.
    :return: PcoaResult.
    """
    if mat.n < PCOA_MIN_SAMPLES:
        raise DimensionError(f"PCoA needs at least {PCOA_MIN_SAMPLES} samples, got {mat.n}")
    if axes is not None and axes < 1:
        raise ValueError(f"Number of axes must be >= 1, got {axes}")
    if eigensolver not in EIGENSOLVERS:
        raise ValueError(f"Unknown eigensolver '{eigensolver}', expected one of {sorted(EIGENSOLVERS)}")

    if naive:
        centered = center_naive(mat, skip_validation=skip_validation)
    else:
        centered = center_fused(mat, tile=tile, threads=threads, skip_validation=skip_validation)

    eigvals, eigvecs = EIGENSOLVERS[eigensolver](centered.data)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.asarray(eigvals, dtype=np.float64)[order]
    eigvecs = np.asarray(eigvecs, dtype=np.float64)[:, order]

    # Tiny eigenvalues of either sign are numerical zeros
    largest = np.abs(eigvals).max() if eigvals.size else 0.0
    threshold = EIGENVALUE_ZERO_RTOL * largest
    positive = eigvals > threshold
    negative_warning = bool((eigvals < -threshold).any())
    if negative_warning:
        logging.warning(
            f"Distance matrix is not Euclidean: {(eigvals < -threshold).sum()} negative eigenvalues "
            f"(smallest {eigvals[-1]:.6g}); they are excluded from coordinates."
        )

    kept = int(positive.sum())
    if axes is not None:
        kept = min(kept, axes)
    coordinates = eigvecs[:, :kept] * np.sqrt(eigvals[:kept])
    positive_total = eigvals[positive].sum()
    proportion = eigvals[:kept] / positive_total if kept else np.empty(0)

    logging.info(f"PCoA kept {kept} axes of {mat.n}; positive eigenvalue total {positive_total:.6g}.")
    return PcoaResult(eigvals, coordinates, proportion, negative_warning, tuple(mat.ids))
