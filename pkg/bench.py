# Naive versus optimized benchmark harness
# bench.py

import csv
import io
import logging
import time
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from tabulate import tabulate

from centering import center_fused, center_naive
from distmat import DistanceMatrix, make_permutations, validate_naive, validate_tiled
from error_handling import ResourceError
from mantel import mantel_fused, mantel_naive
from utils.constants import (
    BENCH_CHECKSUM_RTOL, BENCH_CSV_COLUMNS, BENCH_DEFAULT_PERMUTATIONS, BENCH_DEFAULT_REPETITIONS,
    BENCH_VARIANTS, BENCH_WARMUP_SIZE, BENCH_WORKLOADS, DEFAULT_PRECISION, DEFAULT_SEED, DEFAULT_TILE,
    SPEEDUP_FLOOR, SPEEDUP_FLOOR_MIN_SIZE, SPEEDUP_FLOOR_MIN_THREADS,
)
from utils.helpers import checksums_agree, frobenius_checksum, matrix_nbytes, resolve_dtype, summarize_timings


@dataclass(frozen=True)
class BenchCase:
    workload: str
    n: int
    threads: int
    variant: str
    repetitions: int = BENCH_DEFAULT_REPETITIONS
    tile: int = DEFAULT_TILE
    seed: int = DEFAULT_SEED
    permutations: int = BENCH_DEFAULT_PERMUTATIONS
    precision: str = DEFAULT_PRECISION

    def __post_init__(self):
        if self.workload not in BENCH_WORKLOADS:
            raise ValueError(f"Unknown workload '{self.workload}', expected one of {BENCH_WORKLOADS}")
        if self.variant not in BENCH_VARIANTS:
            raise ValueError(f"Unknown variant '{self.variant}', expected one of {BENCH_VARIANTS}")
        if self.repetitions < 1:
            raise ValueError(f"Repetitions must be >= 1, got {self.repetitions}")
        if self.n < 2:
            raise ValueError(f"Matrix size must be >= 2, got {self.n}")
        if self.workload == 'mantel' and self.n < 3:
            raise ValueError("Mantel benchmarks need n >= 3")
        if self.tile < 1:
            raise ValueError(f"Tile size must be >= 1, got {self.tile}")


@dataclass(frozen=True)
class BenchReport:
    case: BenchCase
    wall_seconds: Tuple[float, float, float]
    checksum: float
    timings: Tuple[float, ...] = ()

    @property
    def min_s(self):
        return self.wall_seconds[0]

    @property
    def median_s(self):
        return self.wall_seconds[1]

    @property
    def max_s(self):
        return self.wall_seconds[2]


def _synthetic_matrix(rng, n, precision):
    u = rng.random(n)
    return DistanceMatrix.from_buffer(np.abs(np.subtract.outer(u, u)), precision=precision)


def synthesize_inputs(n, workload, seed, precision=DEFAULT_PRECISION):
    """
    Builds the validated input(s) for a case: x[i][j] = |u_i - u_j| with u uniform.

    :return: (x, y) where y is None except for the mantel workload.
    :raises ResourceError: If the matrices cannot be allocated.
    """
    rng = np.random.default_rng(seed)
    try:
        x = _synthetic_matrix(rng, n, precision)
        y = _synthetic_matrix(rng, n, precision) if workload == 'mantel' else None
    except MemoryError:
        count = 2 if workload == 'mantel' else 1
        raise ResourceError(count * matrix_nbytes(n, resolve_dtype(precision)))
    return x, y


def _prepare_kernel(case, x, y):
    """Returns a zero-argument callable running the kernel under test and a checksum function."""
    optimized = case.variant == 'optimized'
    if case.workload == 'center':
        if optimized:
            kernel = lambda: center_fused(x, tile=case.tile, threads=case.threads)  # noqa: E731
        else:
            kernel = lambda: center_naive(x)  # noqa: E731
        return kernel, lambda out: frobenius_checksum(out.data)

    if case.workload == 'validate':
        def digest(report):
            return float(2 * report.is_symmetric + report.is_hollow)
        if optimized:
            return (lambda: validate_tiled(x.data, tile=case.tile, threads=case.threads)), digest
        return (lambda: validate_naive(x.data)), digest

    perms = make_permutations(case.n, case.permutations, case.seed, threads=case.threads)

    def mantel_digest(result):
        return float(result.orig_stat + result.p_value + np.abs(result.permuted_stats).sum())
    if optimized:
        return (lambda: mantel_fused(x, y, perms, tile=case.tile, threads=case.threads)), mantel_digest
    return (lambda: mantel_naive(x, y, perms)), mantel_digest


def _warm_up(case):
    small = BenchCase(case.workload, BENCH_WARMUP_SIZE, case.threads, case.variant, 1, case.tile,
                      case.seed, min(case.permutations, 3), case.precision)
    x, y = synthesize_inputs(small.n, small.workload, small.seed, small.precision)
    kernel, _ = _prepare_kernel(small, x, y)
    kernel()


def run_bench(case):
    """
    Times one kernel variant on a synthesized input.

    :param case: BenchCase.
    :return: BenchReport with min/median/max wall seconds and the output checksum.
    """
    x, y = synthesize_inputs(case.n, case.workload, case.seed, case.precision)
    kernel, digest = _prepare_kernel(case, x, y)
    _warm_up(case)

    timings = []
    output = None
    for _ in range(case.repetitions):
        start = time.perf_counter()
        output = kernel()
        timings.append(time.perf_counter() - start)

    report = BenchReport(case, summarize_timings(timings), digest(output), tuple(timings))
    logging.info(
        f"{case.workload} n={case.n} threads={case.threads} {case.variant}: "
        f"median {report.median_s:.4f}s, checksum {report.checksum!r}"
    )
    return report


def run_sweep(workloads=BENCH_WORKLOADS, sizes=(256,), threads_list=(1,), repetitions=BENCH_DEFAULT_REPETITIONS,
              tile=DEFAULT_TILE, seed=DEFAULT_SEED, permutations=BENCH_DEFAULT_PERMUTATIONS,
              precision=DEFAULT_PRECISION, variants=BENCH_VARIANTS):
    """
    Runs every (workload, size, threads, variant) combination.

    :return: List of BenchReport in run order.
    """
    reports = []
    for workload in workloads:
        for n in sizes:
            for threads in threads_list:
                for variant in variants:
                    case = BenchCase(workload, n, threads, variant, repetitions, tile, seed, permutations, precision)
                    reports.append(run_bench(case))
    return reports


def _pair_key(report):
    return report.case.workload, report.case.n, report.case.threads


def _sort_key(report):
    case = report.case
    return case.workload, case.n, case.threads, BENCH_VARIANTS.index(case.variant)


def _paired(reports):
    pairs = {}
    for report in reports:
        pairs.setdefault(_pair_key(report), {})[report.case.variant] = report
    return pairs


def speedups(reports):
    """
    naive_median / optimized_median for every (workload, n, threads) with both variants.

    :return: Dict keyed by (workload, n, threads).
    """
    result = {}
    for key, variants in _paired(reports).items():
        if 'naive' in variants and 'optimized' in variants and variants['optimized'].median_s > 0:
            result[key] = variants['naive'].median_s / variants['optimized'].median_s
    return result


def checksum_mismatches(reports, rtol=BENCH_CHECKSUM_RTOL):
    """
    Lists naive/optimized pairs whose checksums disagree.

    :return: List of (key, naive_checksum, optimized_checksum).
    """
    mismatches = []
    for key, variants in sorted(_paired(reports).items()):
        if 'naive' in variants and 'optimized' in variants:
            a, b = variants['naive'].checksum, variants['optimized'].checksum
            if not checksums_agree(a, b, rtol):
                logging.error(f"Checksum mismatch for {key}: naive {a!r} vs optimized {b!r}")
                mismatches.append((key, a, b))
    return mismatches


def check_speedup_floor(reports, floor=SPEEDUP_FLOOR):
    """
    Soft check of the desk-scale centering speedup; misses are logged as warnings only.

    :return: List of (key, speedup) below the floor.
    """
    misses = []
    for key, speedup in sorted(speedups(reports).items()):
        workload, n, threads = key
        if workload == 'center' and n >= SPEEDUP_FLOOR_MIN_SIZE and threads >= SPEEDUP_FLOOR_MIN_THREADS:
            if speedup < floor:
                logging.warning(f"Centering speedup {speedup:.2f}x at n={n}, threads={threads} is below {floor}x")
                misses.append((key, speedup))
    return misses


def emit_table(reports, fmt='csv'):
    """
    Renders reports as CSV or as a naive/optimized comparison table.

    :param reports: List of BenchReport.
    :param fmt: 'csv' or 'text'.
    :return: Rendered string.
    """
    ordered = sorted(reports, key=_sort_key)
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(BENCH_CSV_COLUMNS)
        for report in ordered:
            case = report.case
            writer.writerow([case.workload, case.n, case.threads, case.variant, case.tile, case.repetitions,
                             f"{report.min_s:.6f}", f"{report.median_s:.6f}", f"{report.max_s:.6f}",
                             repr(report.checksum)])
        return buffer.getvalue()
    if fmt != 'text':
        raise ValueError(f"Unknown format '{fmt}', expected 'csv' or 'text'")

    ratios = speedups(ordered)
    rows = []
    for key, variants in _paired(ordered).items():
        workload, n, threads = key
        precision = next(iter(variants.values())).case.precision
        naive = variants.get('naive')
        optimized = variants.get('optimized')
        rows.append([
            f"{workload}, {threads} cores - {n} x {n}",
            f"{matrix_nbytes(n, resolve_dtype(precision)) / 2**20:.1f}",
            f"{naive.median_s:.4f}" if naive else '-',
            f"{optimized.median_s:.4f}" if optimized else '-',
            f"{ratios[key]:.1f}x" if key in ratios else '-',
        ])
    return tabulate(rows, headers=["workload, cores, size", "working set (MiB)", "naive (s)", "optimized (s)",
                                   "speedup"], tablefmt="pretty")
