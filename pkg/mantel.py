# Mantel test between two distance matrices (two-sided, Pearson statistic)
# mantel.py

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from centering import require_validated
from distmat import CondensedVector, condensed_form, make_permutations, permute
from error_handling import DegenerateVarianceError, DimensionError, LabelError
from multi_threading import kernel_threads
from utils.constants import DEFAULT_PERMUTATIONS, DEFAULT_TILE, MANTEL_MIN_SAMPLES


@dataclass(frozen=True)
class PearsonPrecomp:
    xmean: float
    normxm: float
    mul: float
    add: float
    ynorm: np.ndarray


@dataclass(frozen=True)
class MantelResult:
    orig_stat: float
    permuted_stats: np.ndarray
    p_value: float
    permutations: int


def _values(v):
    return v.values if isinstance(v, CondensedVector) else np.asarray(v)


def _centered_norm(values, name):
    mean = values.mean()
    centered = values - mean
    norm = np.linalg.norm(centered)
    if norm == 0:
        raise DegenerateVarianceError(f"{name} is constant; its Pearson correlation is undefined")
    return mean, centered, norm


def pearson_condensed(x, y):
    """
    Pearson correlation of two condensed vectors, clipped to [-1, 1].

    :raises DimensionError: If lengths differ or are below 2.
    :raises DegenerateVarianceError: If either vector is constant.
    """
    x_flat = np.asarray(_values(x), dtype=np.float64)
    y_flat = np.asarray(_values(y), dtype=np.float64)
    if x_flat.shape != y_flat.shape or x_flat.shape[0] < 2:
        raise DimensionError(f"Need two vectors of equal length >= 2, got {x_flat.shape} and {y_flat.shape}")
    _, xm, normxm = _centered_norm(x_flat, 'x')
    _, ym, normym = _centered_norm(y_flat, 'y')
    xnorm = xm / normxm
    ynorm = ym / normym
    return float(np.clip(np.dot(xnorm, ynorm), -1.0, 1.0))


def precompute_pearson(x, y):
    """
    Quantities of the Pearson statistic that a joint permutation of x cannot change.

    :param x: Condensed x.
    :param y: Condensed y.
    :return: PearsonPrecomp with x's mean and centered norm, the affine pair mapping raw x
        values to normalized ones, and normalized y.
    """
    x_flat = np.asarray(_values(x), dtype=np.float64)
    y_flat = np.asarray(_values(y), dtype=np.float64)
    xmean, _, normxm = _centered_norm(x_flat, 'x')
    _, ym, normym = _centered_norm(y_flat, 'y')
    return PearsonPrecomp(
        xmean=float(xmean),
        normxm=float(normxm),
        mul=float(1.0 / normxm),
        add=float(-xmean / normxm),
        ynorm=np.ascontiguousarray(ym / normym),
    )


def p_value(orig, permuted):
    """
    Two-sided Monte-Carlo p-value: (count(|permuted| >= |orig|) + 1) / (len(permuted) + 1).
    """
    permuted = np.asarray(permuted, dtype=np.float64)
    count_better = int((np.absolute(permuted) >= np.absolute(orig)).sum())
    return (count_better + 1) / (permuted.shape[0] + 1)


def _check_pair(x, y, skip_validation=False):
    require_validated(x, skip_validation)
    require_validated(y, skip_validation)
    if x.n != y.n:
        raise DimensionError(f"Matrices have different sizes: {x.n} and {y.n}")
    if x.n < MANTEL_MIN_SAMPLES:
        raise DimensionError(f"Mantel test needs at least {MANTEL_MIN_SAMPLES} samples, got {x.n}")
    if tuple(x.ids) != tuple(y.ids):
        raise LabelError("Matrices must list the same ids in the same order")


def _check_perms(x, perms):
    if perms.n != x.n:
        raise DimensionError(f"Permutations of length {perms.n} do not match n={x.n}")


def mantel_naive(x, y, perms, skip_validation=False):
    """
    Reference Mantel test: every permutation builds the permuted x, flattens it and calls
    pearson_condensed from scratch.

    :param x: Validated DistanceMatrix.
    :param y: Validated DistanceMatrix with the same ids.
    :param perms: PermutationSet over n.
    :return: MantelResult.
    """
    _check_pair(x, y, skip_validation)
    _check_perms(x, perms)
    x_flat = condensed_form(x)
    y_flat = condensed_form(y)
    orig_stat = pearson_condensed(x_flat, y_flat)

    perm_gen = (pearson_condensed(permute(x, order, condensed=True), y_flat) for order in perms.order)
    permuted_stats = np.fromiter(perm_gen, np.float64, count=perms.k)
    return MantelResult(orig_stat, permuted_stats, p_value(orig_stat, permuted_stats), perms.k)


@njit(parallel=True, cache=True)
def _mantel_perm_kernel(x_data, perm_order, mul, add, ym_normalized, tile, permuted_stats):
    perms_n = perm_order.shape[0]
    out_n = perm_order.shape[1]
    n_blocks = (perms_n + tile - 1) // tile
    for b in prange(n_blocks):
        p0 = b * tile
        p1 = min(p0 + tile, perms_n)
        acc = np.zeros(p1 - p0)
        # one pass over ym_normalized serves every permutation in the block
        for row in range(out_n - 1):
            idx = row * (out_n - 1) - ((row - 1) * row) // 2
            for p in range(p0, p1):
                vrow = perm_order[p, row]
                my_ps = acc[p - p0]
                for icol in range(out_n - row - 1):
                    col = icol + row + 1
                    yval = ym_normalized[idx + icol]
                    xval = x_data[vrow, perm_order[p, col]] * mul + add
                    my_ps = yval * xval + my_ps
                acc[p - p0] = my_ps
        for p in range(p0, p1):
            permuted_stats[p] = min(max(acc[p - p0], -1.0), 1.0)


def _permuted_stats(x_data, order, precomp, tile, threads):
    stats = np.empty(order.shape[0], dtype=np.float64)
    if order.shape[0]:
        with kernel_threads(threads):
            _mantel_perm_kernel(x_data, order, precomp.mul, precomp.add, precomp.ynorm, tile, stats)
    return stats


def mantel_fused(x, y, perms, tile=DEFAULT_TILE, threads=None, skip_validation=False):
    """
    Optimized Mantel test. Each statistic accumulates in the same order whatever the tile
    size or thread count, so the result is identical across both.

    :param x: Validated DistanceMatrix.
    :param y: Validated DistanceMatrix with the same ids.
    :param perms: PermutationSet over n.
    :param tile: Number of permutations sharing one pass over normalized y.
    :param threads: Worker count.
    :return: MantelResult.
    """
    _check_pair(x, y, skip_validation)
    _check_perms(x, perms)
    if tile < 1:
        raise ValueError(f"Tile size must be >= 1, got {tile}")
    precomp = precompute_pearson(condensed_form(x), condensed_form(y))
    x_data = np.ascontiguousarray(x.data)

    identity = np.arange(x.n, dtype=np.intp).reshape(1, x.n)
    orig_stat = float(_permuted_stats(x_data, identity, precomp, tile, threads)[0])
    permuted_stats = _permuted_stats(x_data, np.ascontiguousarray(perms.order, dtype=np.intp), precomp, tile, threads)
    return MantelResult(orig_stat, permuted_stats, p_value(orig_stat, permuted_stats), perms.k)


def mantel(x, y, permutations=DEFAULT_PERMUTATIONS, seed=None, naive=False, tile=DEFAULT_TILE, threads=None,
           skip_validation=False):
    """
    Draws the permutation table and runs the selected Mantel implementation.

    :param x: Validated DistanceMatrix.
    :param y: Validated DistanceMatrix with the same ids.
    :param permutations: Number of Monte-Carlo permutations.
    :param seed: Seed for the permutation table.
    :param naive: Use the reference implementation.
    :return: MantelResult.
    """
    _check_pair(x, y, skip_validation)
    perms = make_permutations(x.n, permutations, seed, threads=threads)
    if naive:
        result = mantel_naive(x, y, perms, skip_validation=skip_validation)
    else:
        result = mantel_fused(x, y, perms, tile=tile, threads=threads, skip_validation=skip_validation)
    logging.info(
        f"Mantel ({'naive' if naive else 'fused'}): r={result.orig_stat:.6f}, "
        f"p={result.p_value:.6g}, permutations={result.permutations}"
    )
    return result
