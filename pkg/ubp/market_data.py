"""Ingests gross-return tables and groups them into investment periods.

A return table has one row per half-period (more generally, one row per
sub-period of an order-H investment period). Row k belongs to sub-period
k mod H of period k // H. Values are GROSS returns: 1.05 means the asset
gained 5%, 0.5 means it lost half its value, 0 means it paid nothing.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass

import numpy as np

from ubp.errors import InputError


logger = logging.getLogger(__name__)


def as_return_vector(values):
    """Validates a single gross-return vector and returns it as a read-only array.

    Raises:
        InputError if the vector is empty, has a negative or non-finite entry,
        or is identically zero.
    """
    vector = np.array(values, dtype=float)

    if vector.ndim != 1 or vector.size == 0:
        raise InputError("A return vector needs at least one entry")
    if not np.all(np.isfinite(vector)):
        raise InputError("Return vectors must be finite")
    if np.any(vector < 0):
        raise InputError("Gross returns cannot be negative")
    if not np.any(vector > 0):
        raise InputError("At least one asset must have a positive return")

    vector.setflags(write=False)
    return vector


def normalize_half(vector):
    """Rescales a return vector onto the unit simplex (entries sum to one)."""
    vector = as_return_vector(vector)
    normalized = vector / vector.sum()
    normalized.setflags(write=False)
    return normalized


@dataclass(frozen=True, eq=False)
class MarketHistory:
    """An immutable sequence of sub-period return vectors.

    Attributes:
        assets: the asset labels, one per column
        order: H, the number of sub-periods per investment period
        halves: array of shape (n, m), one gross-return vector per row
        source_rows: line number of each row in the table it was read from,
            or None for histories built in code
    """

    assets: tuple
    order: int
    halves: np.ndarray
    source_rows: tuple = None

    def __post_init__(self):
        if self.order < 1:
            raise InputError("The order H must be at least 1")

        halves = np.array(self.halves, dtype=float).reshape(-1, len(self.assets))
        for vector in halves:
            as_return_vector(vector)

        halves.setflags(write=False)
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "halves", halves)
        if self.source_rows is not None:
            if len(self.source_rows) != len(halves):
                raise InputError("Expected one source row per return vector")
            object.__setattr__(self, "source_rows", tuple(self.source_rows))

    def source_row(self, index):
        """Source table line of sub-period `index`, or None if unknown."""
        if self.source_rows is None:
            return None
        return self.source_rows[index]

    @property
    def dim(self):
        return len(self.assets)

    @property
    def complete_periods(self):
        return len(self.halves) // self.order

    @property
    def remainder(self):
        """Number of trailing sub-periods belonging to an unfinished period."""
        return len(self.halves) % self.order

    @property
    def is_complete(self):
        return self.remainder == 0

    def period(self, t):
        """The (H, m) block of return vectors for period t (0-based)."""
        return self.halves[t * self.order:(t + 1) * self.order]

    def periods(self):
        for t in range(self.complete_periods):
            yield self.period(t)

    def prefix(self, t):
        """The history restricted to its first t complete periods."""
        stop = t * self.order
        rows = self.source_rows[:stop] if self.source_rows is not None else None
        return MarketHistory(self.assets, self.order, self.halves[:stop], rows)

    def regroup(self, order):
        """The same sub-period returns read as periods of a different order."""
        return MarketHistory(self.assets, order, self.halves, self.source_rows)

    def scaled(self, index, factor):
        """A copy with sub-period `index` multiplied by a positive factor."""
        if factor <= 0:
            raise InputError("Scale factors must be positive")
        halves = np.array(self.halves)
        halves[index] *= factor
        return MarketHistory(self.assets, self.order, halves, self.source_rows)


def pad_incomplete(history):
    """Completes a trailing unfinished period with all-ones (cash-like) returns.

    A period that has only seen r < H of its sub-periods is evaluated as if
    the remaining sub-periods returned exactly 1 on every asset.
    """
    if history.is_complete:
        return history

    missing = history.order - history.remainder
    logger.debug("Padding incomplete period with %d all-ones vector(s)", missing)

    padding = np.ones((missing, history.dim))
    rows = history.source_rows + (None,) * missing if history.source_rows is not None else None
    return MarketHistory(history.assets, history.order, np.vstack([history.halves, padding]), rows)


def parse_history(raw_table, order):
    """Parses a comma separated table of gross returns.

    The first row holds the asset labels. Every following row is one
    sub-period. If the first header cell is `t` that column is treated as a
    time index and ignored. Blank lines are skipped.

    Args:
        raw_table (str): the CSV text
        order (int): H, the number of sub-periods per investment period

    Returns:
        A MarketHistory

    Raises:
        InputError with the offending row and column
    """
    rows = [
        (number, row)
        for number, row in enumerate(csv.reader(io.StringIO(raw_table)), start=1)
        if row and any(cell.strip() for cell in row)
    ]

    if not rows:
        raise InputError("The return table is empty")

    header_number, header = rows[0]
    header = [cell.strip().lstrip("\ufeff") for cell in header]
    skip = 1 if header and header[0] == "t" else 0
    assets = header[skip:]

    if not assets:
        raise InputError("The header names no assets", row=header_number)

    if len(rows) == 1:
        raise InputError("The return table has no data rows")

    halves = []
    source_rows = []
    for number, row in rows[1:]:
        if len(row) != len(header):
            raise InputError(
                "Expected {} cells but found {}".format(len(header), len(row)), row=number
            )

        values = []
        for column, cell in enumerate(row[skip:], start=skip + 1):
            try:
                value = float(cell)
            except ValueError:
                raise InputError("Cannot read '{}' as a number".format(cell.strip()), row=number, column=column)

            if not math.isfinite(value):
                raise InputError("Returns must be finite", row=number, column=column)
            if value < 0:
                raise InputError("Gross returns cannot be negative", row=number, column=column)

            values.append(value)

        if not any(value > 0 for value in values):
            raise InputError("Every asset returned zero", row=number)

        halves.append(values)
        source_rows.append(number)

    history = MarketHistory(tuple(assets), order, np.array(halves), tuple(source_rows))
    logger.debug(
        "Parsed %d sub-periods over %d assets (%d complete periods, %d trailing)",
        len(halves), history.dim, history.complete_periods, history.remainder,
    )

    return history


def serialize_history(history):
    """Writes a history back out in the format parse_history reads."""
    file = io.StringIO()
    writer = csv.writer(file, lineterminator="\n")

    writer.writerow(history.assets)
    writer.writerows([[repr(float(value)) for value in row] for row in history.halves])

    return file.getvalue()


def load_history(file_path, order):
    """Reads and parses a UTF-8 return table from disk."""
    try:
        with open(file_path, encoding="utf-8-sig") as f:
            raw_table = f.read()
    except OSError as e:
        raise InputError("Cannot read {}: {}".format(file_path, e.strerror))

    return parse_history(raw_table, order)
