# reporting.py

import csv

from tabulate import tabulate

from lsmat_io import write_lsmat


def _flag(value):
    return 'true' if value else 'false'


# Validation summary line
def format_validation_report(report):
    """
    One-line summary of a ValidationReport, e.g. "symmetric: true, hollow: true".

    :param report: ValidationReport.
    :return: Summary string, with the first violation appended when there is one.
    """
    line = f"symmetric: {_flag(report.is_symmetric)}, hollow: {_flag(report.is_hollow)}"
    if report.first_violation is not None:
        line += f", first violation: {report.first_violation}"
    return line


# Mantel summary
def format_mantel_result(result, threads):
    """
    Mantel summary block printed by the CLI.

    :param result: MantelResult.
    :param threads: Effective worker count, echoed for reproducibility.
    :return: Multi-line string.
    """
    rows = [
        ["statistic", repr(result.orig_stat)],
        ["p-value", repr(result.p_value)],
        ["permutations", result.permutations],
        ["threads", threads],
    ]
    return "\n".join(f"{name}: {value}" for name, value in rows)


def write_permuted_stats(result, path):
    """
    Dumps the permuted statistics as CSV (index, statistic).

    :param result: MantelResult.
    :param path: Output file path.
    """
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['permutation', 'statistic'])
        for index, stat in enumerate(result.permuted_stats):
            writer.writerow([index, repr(float(stat))])


# PCoA text result
def write_pcoa_result(result, stream):
    """
    Writes one line per retained axis (eigenvalue, proportion explained), then the coordinate
    table (id followed by one value per axis).

    :param result: PcoaResult.
    :param stream: Writable text stream.
    """
    stream.write("axis\teigenvalue\tproportion_explained\n")
    for axis in range(result.axes):
        eigenvalue = float(result.eigenvalues[axis])
        proportion = float(result.proportion_explained[axis])
        stream.write(f"PC{axis + 1}\t{eigenvalue!r}\t{proportion!r}\n")
    stream.write("\n")
    stream.write("\t".join(["id"] + [f"PC{axis + 1}" for axis in range(result.axes)]) + "\n")
    for sample_id, row in zip(result.ids, result.coordinates):
        stream.write("\t".join([sample_id] + [repr(float(v)) for v in row]) + "\n")


def format_pcoa_summary(result, limit=10):
    """
    Human-readable table of the leading axes, used for log output.

    :param result: PcoaResult.
    :param limit: Maximum number of axes shown.
    :return: Table string.
    """
    rows = [[f"PC{axis + 1}", f"{result.eigenvalues[axis]:.6g}", f"{result.proportion_explained[axis]:.4f}"]
            for axis in range(min(result.axes, limit))]
    return tabulate(rows, headers=["Axis", "Eigenvalue", "Proportion"], tablefmt="pretty")


def write_centered(centered, ids, stream):
    """Writes a centered matrix in lsmat layout."""
    write_lsmat(centered.data, ids, stream)
