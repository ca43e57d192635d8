import logging
import statistics

import numpy as np

from .constants import PRECISION_DTYPES


# Precision Resolution
def resolve_dtype(precision):
    """
    Maps a precision name ('f64' or 'f32') to the numpy dtype used for matrix buffers.

    :param precision: Precision name, or a numpy dtype which is passed through.
    :return: numpy dtype.
    :raises ValueError: If the precision is not supported.
    """
    if isinstance(precision, np.dtype):
        dtype = precision
    elif precision in PRECISION_DTYPES:
        dtype = np.dtype(PRECISION_DTYPES[precision])
    else:
        raise ValueError(f"Unsupported precision '{precision}', expected one of {sorted(PRECISION_DTYPES)}")
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"Unsupported element type {dtype}")
    return dtype


# Timing Summary
def summarize_timings(timings):
    """
    Reduces a list of wall-clock timings to (min, median, max).

    :param timings: Non-empty sequence of seconds.
    :return: Tuple (min_s, median_s, max_s).
    """
    if not timings:
        raise ValueError("At least one timing is required")
    summary = (min(timings), statistics.median(timings), max(timings))
    logging.debug(f"Timing summary over {len(timings)} runs: {summary}")
    return summary


# Working Set Size
def matrix_nbytes(n, dtype):
    """
    Bytes occupied by one dense n x n buffer of the given element type.

    :param n: Matrix dimension.
    :param dtype: numpy dtype of the elements.
    :return: Size in bytes.
    """
    return int(n) * int(n) * np.dtype(dtype).itemsize


# Scalar Digest for Benchmark Outputs
def frobenius_checksum(data):
    """
    Digests a numeric buffer into one scalar that changes with any element.

    :param data: numpy array.
    :return: Frobenius norm as a Python float.
    """
    return float(np.linalg.norm(np.asarray(data, dtype=np.float64)))


def checksums_agree(a, b, rtol):
    """
    Compares two checksums with a relative tolerance.

    :param a: First checksum.
    :param b: Second checksum.
    :param rtol: Relative tolerance scaled by the larger magnitude.
    :return: True if the checksums agree.
    """
    scale = max(abs(a), abs(b), 1.0)
    return abs(a - b) <= rtol * scale


# Format Error Messages for User Display
def format_error_message(error, details=None):
    """
    Formats an error message with optional details for user display.

    :param error: Main error message.
    :param details: Additional details to include in the message.
    :return: Formatted string combining error and details.
    """
    message = f"Error: {error}"
    if details:
        message += f"\nDetails: {details}"
    return message
