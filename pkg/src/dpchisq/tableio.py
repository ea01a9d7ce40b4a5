"""CSV reading and writing for count tables and noisy tables.

Count tables are one CSV row per table row with integer cells. A header
line is optional: the first row is treated as a header when any of its
fields fails to parse as a number. Noisy tables are written with 17
significant digits so a round trip is exact in double precision.
"""
import csv
import io

import numpy as np

from .errors import ValidationError
from .model import check_count_table
from .privacy import NoisyTable


def _is_number(field):
    try:
        float(field)
    except ValueError:
        return False
    return True


def _read_rows(source):
    if isinstance(source, (str, bytes)) and "\n" not in str(source):
        try:
            with open(source, newline="") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read table file {source!r}: {exc}") from exc
    else:
        text = source.read() if hasattr(source, "read") else str(source)
    rows = [[f.strip() for f in row] for row in csv.reader(io.StringIO(text))]
    rows = [row for row in rows if row and any(row)]
    if not rows:
        raise ValidationError("table file is empty")
    if not all(_is_number(f) for f in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValidationError("table file has a header but no data")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValidationError("table rows have unequal lengths")
    for row in rows:
        for f in row:
            if not _is_number(f):
                raise ValidationError(f"non-numeric cell {f!r}")
    return rows


def read_count_table(source):
    """Parse a count table from a path, a file object or CSV text.

    A single row is returned as a flat vector (a goodness-of-fit histogram);
    several rows give an ``(r, c)`` contingency table.
    """
    rows = _read_rows(source)
    values = np.array([[float(f) for f in row] for row in rows])
    table = check_count_table(values)
    return table[0] if table.shape[0] == 1 else table


def write_count_table(table, dest=None, header=None):
    """Write integer counts as CSV; returns the text when ``dest`` is None."""
    table = np.atleast_2d(check_count_table(table))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in table:
        writer.writerow([int(v) for v in row])
    return _finish(buf, dest)


def read_noisy_table(source, n):
    """Parse real-valued noisy counts; ``n`` is the public total."""
    rows = _read_rows(source)
    values = np.array([[float(f) for f in row] for row in rows])
    if values.shape[0] == 1:
        values = values[0]
    return NoisyTable(values=values, n=int(n))


def write_noisy_table(table, dest=None):
    """Write noisy counts with 17 significant digits."""
    values = table.values if isinstance(table, NoisyTable) else np.asarray(table, dtype=float)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(values):
        writer.writerow([f"{v:.17g}" for v in row])
    return _finish(buf, dest)


def _finish(buf, dest):
    text = buf.getvalue()
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return None
