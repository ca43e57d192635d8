# Constants for kernels, file formats, logging, etc.
# constants.py

# Kernel Defaults
DEFAULT_TILE = 16  # 16x16 tiles of 8-byte elements: two tiles fit in 4 KiB
DEFAULT_PRECISION = 'f64'
DEFAULT_THREADS = 0  # 0 means all available cores
DEFAULT_ATOL = 0.0  # Exact comparisons unless asked otherwise

# Supported element precisions (CLI name to numpy dtype name)
PRECISION_DTYPES = {
    'f64': 'float64',
    'f32': 'float32',
}

# Permutation Defaults
DEFAULT_PERMUTATIONS = 999
DEFAULT_SEED = 0
PERMUTATION_CHUNK_ROWS = 64  # Rows per independent RNG stream

# Mantel needs at least three samples for a non-constant condensed vector
MANTEL_MIN_SAMPLES = 3
PCOA_MIN_SAMPLES = 2

# Eigenvalues within this fraction of the largest magnitude count as zero
EIGENVALUE_ZERO_RTOL = 1e-12
DEFAULT_EIGENSOLVER = 'dense'

# Labeled square matrix (lsmat) text format
LSMAT_DELIMITER = '\t'
LSMAT_DIGITS = 17  # Enough significant digits to round-trip float64

# Benchmark Defaults
BENCH_WORKLOADS = ('center', 'mantel', 'validate')
BENCH_VARIANTS = ('naive', 'optimized')
BENCH_DEFAULT_SIZES = (256, 1024, 4096, 8192)
BENCH_DEFAULT_REPETITIONS = 3
BENCH_DEFAULT_PERMUTATIONS = 99
BENCH_WARMUP_SIZE = 8
BENCH_CHECKSUM_RTOL = 1e-9
BENCH_CSV_COLUMNS = ('workload', 'n', 'threads', 'variant', 'tile', 'reps',
                     'min_s', 'median_s', 'max_s', 'checksum')

# Soft speedup floor for centering at desk scale
SPEEDUP_FLOOR = 3.0
SPEEDUP_FLOOR_MIN_SIZE = 8192
SPEEDUP_FLOOR_MIN_THREADS = 4

# Environment Variables
ENV_THREADS = 'DMK_THREADS'
ENV_LOG_FILE = 'DMK_LOG_FILE'
ENV_LOG_LEVEL = 'DMK_LOG_LEVEL'

# Logging Configuration Constants
LOG_FORMAT = '%(asctime)s:%(levelname)s:%(message)s'
LOG_MAX_BYTES = 5 * 1024 * 1024  # 5 MB per log file
LOG_BACKUP_COUNT = 5  # Number of backup log files to keep

# CLI Exit Codes
EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
