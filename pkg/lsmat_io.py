import logging

import numpy as np

from distmat import DistanceMatrix
from error_handling import DimensionError, LabelError, LsmatParseError
from utils.constants import DEFAULT_PRECISION, LSMAT_DELIMITER, LSMAT_DIGITS
from utils.helpers import resolve_dtype


def _parse_row(cells, line_no, row_index, dtype):
    try:
        values = np.asarray(cells, dtype=dtype)
    except ValueError:
        # Locate the offending cell for the error message
        for col, cell in enumerate(cells):
            try:
                float(cell)
            except ValueError:
                raise LsmatParseError(f"Non-numeric value '{cell}'", line=line_no, position=(row_index, col))
        raise
    finite = np.isfinite(values)
    if not finite.all():
        col = int(np.flatnonzero(~finite)[0])
        raise LsmatParseError(f"Non-finite value '{cells[col]}'", line=line_no, position=(row_index, col))
    return values


# Parse a labeled square matrix
def parse_lsmat(stream, precision=DEFAULT_PRECISION):
    """
    Reads a labeled square matrix: a header of TAB-separated ids after a leading TAB, then one
    line per id holding the id and n values.

    :param stream: Iterable of text lines.
    :param precision: 'f64' or 'f32'.
    :return: Unvalidated DistanceMatrix.
    :raises LsmatParseError: For a missing header, ragged rows, wrong row counts, non-numeric
        or non-finite cells.
    :raises LabelError: For duplicate ids or row ids that do not follow the header order.
    """
    dtype = resolve_dtype(precision)
    lines = iter(stream)
    header = None
    line_no = 0
    for raw in lines:
        line_no += 1
        if raw.strip():
            header = raw.rstrip('\r\n')
            break
    if header is None:
        raise LsmatParseError("Empty input, expected an lsmat header")
    if not header.startswith(LSMAT_DELIMITER):
        raise LsmatParseError("Header must start with a TAB followed by the ids", line=line_no)

    ids = header.split(LSMAT_DELIMITER)[1:]
    n = len(ids)
    if n == 0 or any(i == '' for i in ids):
        raise LsmatParseError("Header has no ids or an empty id", line=line_no)
    if len(set(ids)) != n:
        raise LabelError(f"Duplicate ids in header: {sorted({i for i in ids if ids.count(i) > 1})}")

    data = np.empty((n, n), dtype=dtype)
    row_index = 0
    for raw in lines:
        line_no += 1
        line = raw.rstrip('\r\n')
        if not line.strip():
            continue
        fields = line.split(LSMAT_DELIMITER)
        if row_index >= n:
            raise LsmatParseError(f"More data rows than the {n} ids in the header", line=line_no)
        if len(fields) != n + 1:
            raise LsmatParseError(f"Row has {len(fields) - 1} values, expected {n}", line=line_no)
        if fields[0] != ids[row_index]:
            raise LabelError(
                f"Row id '{fields[0]}' on line {line_no} does not match header id '{ids[row_index]}'"
            )
        data[row_index] = _parse_row(fields[1:], line_no, row_index, dtype)
        row_index += 1

    if row_index != n:
        raise LsmatParseError(f"Found {row_index} data rows, expected {n}", line=line_no)
    logging.debug(f"Parsed {n}x{n} lsmat matrix.")
    return DistanceMatrix(data, tuple(ids))


def read_lsmat(path, precision=DEFAULT_PRECISION):
    """
    Parses an lsmat file from disk.

    :param path: File path.
    :param precision: 'f64' or 'f32'.
    :return: Unvalidated DistanceMatrix.
    """
    with open(path, 'r', encoding='utf-8') as handle:
        mat = parse_lsmat(handle, precision=precision)
    logging.info(f"Loaded {mat.n}x{mat.n} matrix from '{path}'.")
    return mat


# Write a labeled square matrix
def write_lsmat(data, ids, stream, digits=LSMAT_DIGITS):
    """
    Writes a full (not condensed) matrix in lsmat format.

    :param data: n x n array-like (a DistanceMatrix buffer or a centered matrix).
    :param ids: n sample labels.
    :param stream: Writable text stream.
    :param digits: Significant digits per value (17 round-trips float64).
    :raises DimensionError: If ids are empty or do not match the matrix size.
    """
    data = np.asarray(data)
    ids = list(ids)
    if not ids:
        raise DimensionError("Cannot write a matrix without ids (n >= 1 required)")
    if data.shape != (len(ids), len(ids)):
        raise DimensionError(f"Matrix shape {data.shape} does not match {len(ids)} ids")

    fmt = f".{digits}g"
    stream.write(LSMAT_DELIMITER + LSMAT_DELIMITER.join(ids) + '\n')
    for sample_id, row in zip(ids, data):
        stream.write(sample_id + LSMAT_DELIMITER + LSMAT_DELIMITER.join(format(float(v), fmt) for v in row) + '\n')
