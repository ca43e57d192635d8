# error_handling.py

import logging

from utils.constants import EXIT_NUMERIC, EXIT_USAGE, EXIT_VALIDATION_FAILED
from utils.helpers import format_error_message


# Base exception for everything this package raises on purpose
class DistanceMatrixError(Exception):
    """Base class for distance-matrix kernel errors."""
    exit_code = EXIT_USAGE


class DimensionError(DistanceMatrixError):
    """Raised for non-square buffers, sizes below the minimum or size mismatches."""


class PreconditionError(DistanceMatrixError, ValueError):
    """Raised when index arguments break an operation's precondition."""


class LabelError(DistanceMatrixError):
    """Raised for duplicate sample ids or id orders that do not line up."""


class ConfigurationError(DistanceMatrixError, ValueError):
    """Raised when an environment value cannot be interpreted."""


class ValidationRequiredError(DistanceMatrixError):
    """Raised when a kernel receives a matrix that was never validated."""


class LsmatParseError(DistanceMatrixError):
    """
    Raised for malformed lsmat text.

    :param message: Description of the problem.
    :param line: 1-based line number of the offending line, if known.
    :param position: (row, col) of a bad cell, if known.
    """

    def __init__(self, message, line=None, position=None):
        self.line = line
        self.position = position
        details = []
        if line is not None:
            details.append(f"line {line}")
        if position is not None:
            details.append(f"cell (row={position[0]}, col={position[1]})")
        super().__init__(f"{message} ({', '.join(details)})" if details else message)


class NotSymmetricHollowError(DistanceMatrixError):
    """Raised when a buffer fails the symmetric/hollow check at construction."""
    exit_code = EXIT_VALIDATION_FAILED

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"Matrix is not a distance matrix: symmetric={report.is_symmetric}, "
            f"hollow={report.is_hollow}, first violation at {report.first_violation}"
        )


class DegenerateVarianceError(DistanceMatrixError, ArithmeticError):
    """Raised when a Pearson correlation is requested for a constant vector."""
    exit_code = EXIT_NUMERIC


class EigensolverError(DistanceMatrixError, ArithmeticError):
    """
    Raised when the eigensolver fails.

    :param solver: Name of the eigensolver backend.
    :param diagnostics: Backend message (iteration counts, failing index, ...).
    """
    exit_code = EXIT_NUMERIC

    def __init__(self, solver, diagnostics):
        self.solver = solver
        self.diagnostics = diagnostics
        super().__init__(f"Eigensolver '{solver}' failed: {diagnostics}")


class ResourceError(DistanceMatrixError, MemoryError):
    """
    Raised when a matrix cannot be allocated.

    :param attempted_bytes: Size of the allocation that failed.
    """
    exit_code = EXIT_NUMERIC

    def __init__(self, attempted_bytes):
        self.attempted_bytes = attempted_bytes
        super().__init__(f"Could not allocate {attempted_bytes / 2**20:.1f} MiB")


# Map any exception to the exit code the CLI reports
def exit_code_for(error):
    """
    Maps an exception to a CLI exit code.

    :param error: The exception that stopped the command.
    :return: 1 for validation failures, 2 for usage/parse errors, 3 for numeric errors.
    """
    if isinstance(error, DistanceMatrixError):
        return error.exit_code
    if isinstance(error, (ArithmeticError, MemoryError)):
        return EXIT_NUMERIC
    return EXIT_USAGE


# Report a CLI failure on the diagnostic stream
def report_cli_error(error, command=None):
    """
    Logs a failure so it is never silent and returns the matching exit code.

    :param error: The exception raised by the command.
    :param command: Subcommand name, used for context in the message.
    :return: Exit code for the error.
    """
    code = exit_code_for(error)
    details = f"subcommand '{command}' exited with code {code}" if command else None
    logging.error(format_error_message(error, details))
    return code
