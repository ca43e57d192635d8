# Command-line entry point and subcommand dispatch
# main.py

import argparse
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional, Tuple

from bench import check_speedup_floor, checksum_mismatches, emit_table, run_sweep
from centering import center_fused, center_naive
from config import get_kernel_config, get_logging_config, load_env_variables, setup_logging
from distmat import mark_validated, validate_naive, validate_tiled
from error_handling import DistanceMatrixError, NotSymmetricHollowError, report_cli_error
from lsmat_io import read_lsmat
from mantel import mantel
from multi_threading import resolve_thread_count
from pcoa import pcoa
from reporting import (
    format_mantel_result, format_pcoa_summary, format_validation_report, write_centered, write_pcoa_result,
    write_permuted_stats,
)
from utils.constants import (
    BENCH_DEFAULT_PERMUTATIONS, BENCH_DEFAULT_REPETITIONS, BENCH_DEFAULT_SIZES, BENCH_WORKLOADS,
    DEFAULT_PERMUTATIONS, DEFAULT_PRECISION, DEFAULT_SEED, DEFAULT_TILE, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION_FAILED,
    PRECISION_DTYPES,
)

# Number of positional inputs each subcommand takes
INPUT_COUNTS = {'validate': 1, 'center': 1, 'pcoa': 1, 'mantel': 2, 'bench': 0}


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    inputs: Tuple[str, ...] = ()
    output: Optional[str] = None
    threads: Optional[int] = None
    tile: int = DEFAULT_TILE
    precision: str = DEFAULT_PRECISION
    seed: int = DEFAULT_SEED
    permutations: int = DEFAULT_PERMUTATIONS
    naive: bool = False
    skip_validation: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = INPUT_COUNTS.get(self.subcommand)
        if expected is None:
            raise ValueError(f"Unknown subcommand '{self.subcommand}'")
        if len(self.inputs) != expected:
            raise ValueError(f"'{self.subcommand}' takes {expected} input file(s), got {len(self.inputs)}")
        if self.tile < 1:
            raise ValueError(f"--tile must be >= 1, got {self.tile}")
        if self.permutations < 0:
            raise ValueError(f"--permutations must be >= 0, got {self.permutations}")

    @classmethod
    def from_namespace(cls, args):
        inputs = tuple(getattr(args, 'inputs', ()) or ())
        extra = {key: getattr(args, key) for key in ('axes', 'permuted_stats', 'workload', 'sizes',
                                                    'threads_list', 'reps', 'format') if hasattr(args, key)}
        threads = args.threads if args.threads is not None else get_kernel_config()['threads']
        return cls(
            subcommand=args.subcommand,
            inputs=inputs,
            output=args.output,
            threads=threads,
            tile=args.tile,
            precision=args.precision,
            seed=args.seed,
            permutations=getattr(args, 'permutations', DEFAULT_PERMUTATIONS),
            naive=args.naive,
            skip_validation=args.skip_validation,
            extra=extra,
        )


def _int_list(text):
    try:
        values = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("Expected at least one value")
    return values


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=int, default=None,
                        help="Worker threads for parallel kernels (0 = all available; default from DMK_THREADS)")
    common.add_argument('--tile', type=int, default=DEFAULT_TILE, help="Tile size for blocked kernels")
    common.add_argument('--precision', choices=sorted(PRECISION_DTYPES), default=DEFAULT_PRECISION,
                        help="Element precision")
    common.add_argument('--seed', type=int, default=DEFAULT_SEED, help="Seed for permutations and synthetic inputs")
    common.add_argument('--naive', action='store_true', help="Run the reference implementation")
    common.add_argument('--skip-validation', action='store_true',
                        help="Do not check that inputs are symmetric and hollow")
    common.add_argument('-o', '--output', default=None, help="Output file (default: stdout)")
    common.add_argument('--log-file', default=None, help="Rotating log file (default: DMK_LOG_FILE)")
    common.add_argument('-v', '--verbose', action='store_true', help="Debug logging")

    parser = argparse.ArgumentParser(
        prog='dmk', description="Cache-aware distance-matrix validation, centering, PCoA and Mantel tests.")
    subparsers = parser.add_subparsers(dest='subcommand', required=True)

    validate = subparsers.add_parser('validate', parents=[common], help="Check symmetry and hollowness")
    validate.add_argument('inputs', nargs=1, metavar='MATRIX')

    center = subparsers.add_parser('center', parents=[common], help="Gower double-centering")
    center.add_argument('inputs', nargs=1, metavar='MATRIX')

    pcoa_parser = subparsers.add_parser('pcoa', parents=[common], help="Principal coordinates analysis")
    pcoa_parser.add_argument('inputs', nargs=1, metavar='MATRIX')
    pcoa_parser.add_argument('--axes', type=int, default=None, help="Maximum number of axes to keep")

    mantel_parser = subparsers.add_parser('mantel', parents=[common], help="Mantel permutation test")
    mantel_parser.add_argument('inputs', nargs=2, metavar='MATRIX')
    mantel_parser.add_argument('--permutations', type=int, default=DEFAULT_PERMUTATIONS)
    mantel_parser.add_argument('--permuted-stats', default=None, metavar='CSV',
                               help="Write the permuted statistics to this CSV file")

    bench = subparsers.add_parser('bench', parents=[common], help="Naive versus optimized timings")
    bench.add_argument('--workload', nargs='+', choices=BENCH_WORKLOADS, default=list(BENCH_WORKLOADS))
    bench.add_argument('--sizes', type=_int_list, default=list(BENCH_DEFAULT_SIZES))
    bench.add_argument('--threads-list', type=_int_list, default=None)
    bench.add_argument('--reps', type=int, default=BENCH_DEFAULT_REPETITIONS)
    bench.add_argument('--format', choices=('csv', 'text'), default='csv')
    bench.add_argument('--permutations', type=int, default=BENCH_DEFAULT_PERMUTATIONS)
    return parser


@contextmanager
def open_output(path):
    """
    Yields a writable text stream: the named file, or stdout when no path is given.

    :param path: Output path or None.
    """
    if path is None:
        yield sys.stdout
        return
    with open(path, 'w', encoding='utf-8') as handle:
        yield handle
    logging.info(f"Wrote output to '{path}'.")


def _validate_buffer(mat, config, threads):
    if config.naive:
        return validate_naive(mat)
    return validate_tiled(mat, tile=config.tile, threads=threads)


def load_matrix(path, config, threads):
    """
    Reads an lsmat file and validates it unless validation is skipped.

    :raises NotSymmetricHollowError: If the matrix fails validation.
    """
    mat = read_lsmat(path, precision=config.precision)
    if config.skip_validation:
        logging.info(f"Skipping validation of '{path}'.")
        return mat
    report = _validate_buffer(mat, config, threads)
    if not report.passed:
        raise NotSymmetricHollowError(report)
    logging.info(f"'{path}' is symmetric and hollow.")
    return mark_validated(mat, report)


def run_validate(config, threads):
    mat = read_lsmat(config.inputs[0], precision=config.precision)
    report = _validate_buffer(mat, config, threads)
    with open_output(config.output) as stream:
        stream.write(format_validation_report(report) + "\n")
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


def run_center(config, threads):
    mat = load_matrix(config.inputs[0], config, threads)
    if config.naive:
        centered = center_naive(mat, skip_validation=config.skip_validation)
    else:
        centered = center_fused(mat, tile=config.tile, threads=threads, skip_validation=config.skip_validation)
    with open_output(config.output) as stream:
        write_centered(centered, mat.ids, stream)
    return EXIT_OK


def run_pcoa(config, threads):
    mat = load_matrix(config.inputs[0], config, threads)
    result = pcoa(mat, axes=config.extra.get('axes'), tile=config.tile, threads=threads, naive=config.naive,
                  skip_validation=config.skip_validation)
    logging.info("Leading axes:\n" + format_pcoa_summary(result))
    with open_output(config.output) as stream:
        write_pcoa_result(result, stream)
    return EXIT_OK


def run_mantel(config, threads):
    x = load_matrix(config.inputs[0], config, threads)
    y = load_matrix(config.inputs[1], config, threads)
    result = mantel(x, y, permutations=config.permutations, seed=config.seed, naive=config.naive,
                    tile=config.tile, threads=threads, skip_validation=config.skip_validation)
    with open_output(config.output) as stream:
        stream.write(format_mantel_result(result, threads) + "\n")
    if config.extra.get('permuted_stats'):
        write_permuted_stats(result, config.extra['permuted_stats'])
    return EXIT_OK


def run_bench_command(config, threads):
    threads_list = config.extra.get('threads_list') or [threads]
    threads_list = [resolve_thread_count(t) for t in threads_list]
    reports = run_sweep(
        workloads=config.extra['workload'],
        sizes=config.extra['sizes'],
        threads_list=threads_list,
        repetitions=config.extra['reps'],
        tile=config.tile,
        seed=config.seed,
        permutations=config.permutations,
        precision=config.precision,
    )
    with open_output(config.output) as stream:
        stream.write(emit_table(reports, config.extra['format']))
        if config.extra['format'] == 'text':
            stream.write("\n")
    check_speedup_floor(reports)
    if checksum_mismatches(reports):
        logging.error("Naive and optimized checksums disagree.")
        return EXIT_VALIDATION_FAILED
    return EXIT_OK


COMMANDS = {
    'validate': run_validate,
    'center': run_center,
    'pcoa': run_pcoa,
    'mantel': run_mantel,
    'bench': run_bench_command,
}


# Main entry function
def main(argv=None):
    """
    Runs one subcommand.

    :param argv: Argument list (default: sys.argv[1:]).
    :return: 0 on success, 1 on validation failure, 2 on usage/parse errors, 3 on numeric errors.
    """
    load_env_variables()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        log_config = get_logging_config()
        setup_logging(log_file=args.log_file or log_config['log_file'],
                      log_level=logging.DEBUG if args.verbose else log_config['log_level'])
        config = CliConfig.from_namespace(args)
        threads = resolve_thread_count(config.threads)
        logging.info(f"Running '{config.subcommand}' with {threads} threads.")
        return COMMANDS[config.subcommand](config, threads)
    except (DistanceMatrixError, ValueError, OSError, ArithmeticError, MemoryError) as e:
        return report_cli_error(e, args.subcommand)


if __name__ == "__main__":
    sys.exit(main())
