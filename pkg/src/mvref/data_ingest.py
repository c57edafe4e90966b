"""Loading and aligning per-period return series.

Period keys are opaque strings ordered lexicographically; no calendar logic
is applied. Alignment keeps only periods present in every input.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DuplicatePeriod,
    EmptySeries,
    InsufficientOverlap,
    LengthMismatch,
    ParseError,
    TooFewSecurities,
)

MIN_PERIODS = 3
MIN_SECURITIES = 2
DEFAULT_PERIOD_COLUMN = "period"


def _frozen(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ReturnSeries:
    """One-period returns of a single instrument."""

    label: str
    periods: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(str(p) for p in self.periods))
        object.__setattr__(self, "values", _frozen(self.values, 1))
        if len(self.periods) != len(self.values):
            raise LengthMismatch(
                f"{self.label}: {len(self.periods)} periods but {len(self.values)} values"
            )
        for prev, cur in zip(self.periods, self.periods[1:]):
            if cur == prev:
                raise DuplicatePeriod(f"{self.label}: duplicated period {cur!r}")
            if cur < prev:
                raise ValueError(f"{self.label}: periods not increasing at {cur!r}")
        if not np.all(np.isfinite(self.values)):
            raise ParseError(f"{self.label}: non-finite return value")

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_unsorted(cls, label: str, periods: Sequence[str], values: Sequence[float]):
        """Build a series from rows in arbitrary order, sorting by period key."""
        if len(periods) != len(values):
            raise LengthMismatch(f"{label}: {len(periods)} periods but {len(values)} values")
        order = sorted(range(len(periods)), key=lambda k: periods[k])
        return cls(label, [periods[k] for k in order], [values[k] for k in order])


@dataclass(frozen=True)
class AlignedPanel:
    """Reference and accepted-set returns on a common set of periods.

    ``accepted`` is T x N, column i holding security ``labels[i]``.
    """

    period_keys: tuple[str, ...]
    reference: np.ndarray
    accepted: np.ndarray
    labels: tuple[str, ...]
    reference_label: str = "reference"

    def __post_init__(self):
        object.__setattr__(self, "period_keys", tuple(str(p) for p in self.period_keys))
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        object.__setattr__(self, "reference", _frozen(self.reference, 1))
        object.__setattr__(self, "accepted", _frozen(self.accepted, 2))
        T = len(self.period_keys)
        if self.reference.shape != (T,) or self.accepted.shape[0] != T:
            raise LengthMismatch(
                f"panel shapes disagree: {T} periods, reference {self.reference.shape}, "
                f"accepted {self.accepted.shape}"
            )
        if self.accepted.shape[1] != len(self.labels):
            raise LengthMismatch("one label per accepted column required")
        if len(self.labels) < MIN_SECURITIES:
            raise TooFewSecurities(
                f"need at least {MIN_SECURITIES} accepted securities, got {len(self.labels)}"
            )
        if T < MIN_PERIODS:
            raise InsufficientOverlap(f"need at least {MIN_PERIODS} common periods, got {T}")
        if len(set(self.period_keys)) != T or list(self.period_keys) != sorted(self.period_keys):
            raise DuplicatePeriod("panel period keys must be strictly increasing")
        if not (np.all(np.isfinite(self.reference)) and np.all(np.isfinite(self.accepted))):
            raise ParseError("panel contains non-finite returns")

    @property
    def T(self) -> int:
        return len(self.period_keys)

    @property
    def N(self) -> int:
        return len(self.labels)

    def reference_series(self) -> ReturnSeries:
        return ReturnSeries(self.reference_label, self.period_keys, self.reference)

    def accepted_series(self) -> list[ReturnSeries]:
        return [
            ReturnSeries(label, self.period_keys, self.accepted[:, i])
            for i, label in enumerate(self.labels)
        ]

    def window(self, start: int, stop: int) -> "AlignedPanel":
        """Sub-panel of periods ``start:stop`` (time order kept)."""
        return AlignedPanel(
            self.period_keys[start:stop],
            self.reference[start:stop],
            self.accepted[start:stop],
            self.labels,
            self.reference_label,
        )


def _read_rows(path, delimiter: str) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh, delimiter=delimiter) if row]
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except (UnicodeDecodeError, csv.Error) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not rows:
        raise EmptySeries(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{where}: non-numeric value {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"{where}: non-finite value {text!r}")
    return value


def _read_columns(
    path, columns: Sequence[str] | None, period_column: str, delimiter: str
) -> tuple[list[str], list[str], list[list[float]]]:
    header, rows = _read_rows(path, delimiter)
    if period_column not in header:
        raise ParseError(f"{path}: no {period_column!r} column in header {header}")
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicated column names in header")
    pcol = header.index(period_column)
    if columns is None:
        columns = [h for h in header if h != period_column]
    missing = [c for c in columns if c not in header]
    if missing:
        raise ParseError(f"{path}: missing columns {missing}")
    idx = [header.index(c) for c in columns]
    periods: list[str] = []
    data: list[list[float]] = [[] for _ in columns]
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        periods.append(row[pcol].strip())
        for k, j in enumerate(idx):
            data[k].append(_parse_float(row[j].strip(), f"{path}:{lineno}"))
    if not periods:
        raise EmptySeries(f"{path}: no data rows")
    return list(columns), periods, data


def load_series(
    path,
    column: str | None = None,
    *,
    label: str | None = None,
    period_column: str = DEFAULT_PERIOD_COLUMN,
    delimiter: str = ",",
) -> ReturnSeries:
    """Read one return series from a delimited file.

    ``column`` names the value column; when omitted the file must hold exactly
    one column besides the period column. Rows are sorted by period key.
    """
    if column is None:
        header, _ = _read_rows(path, delimiter)
        values = [h for h in header if h != period_column]
        if len(values) != 1:
            raise ParseError(f"{path}: expected one value column, found {values}; pass column=")
        column = values[0]
    names, periods, data = _read_columns(path, [column], period_column, delimiter)
    return ReturnSeries.from_unsorted(label or names[0], periods, data[0])


def load_wide(
    path,
    reference_column: str | None = None,
    *,
    period_column: str = DEFAULT_PERIOD_COLUMN,
    delimiter: str = ",",
) -> tuple[ReturnSeries, list[ReturnSeries]]:
    """Read a wide file holding the reference and every accepted security.

    The reference is ``reference_column``, or the first value column when not
    given; all other value columns form the accepted set, in file order.
    """
    names, periods, data = _read_columns(path, None, period_column, delimiter)
    if not names:
        raise ParseError(f"{path}: no value columns")
    ref_name = reference_column if reference_column is not None else names[0]
    if ref_name not in names:
        raise ParseError(f"{path}: reference column {ref_name!r} not found")
    series = [ReturnSeries.from_unsorted(n, periods, col) for n, col in zip(names, data)]
    ref = series[names.index(ref_name)]
    return ref, [s for s in series if s.label != ref_name]


def load_panel(path, reference_column: str | None = None, **kwargs) -> AlignedPanel:
    ref, accepted = load_wide(path, reference_column, **kwargs)
    return align(ref, accepted)


def align(reference: ReturnSeries, accepted: Sequence[ReturnSeries]) -> AlignedPanel:
    """Intersect period keys across all series and stack them into a panel."""
    if len(accepted) < MIN_SECURITIES:
        raise TooFewSecurities(
            f"need at least {MIN_SECURITIES} accepted securities, got {len(accepted)}"
        )
    common = set(reference.periods)
    for s in accepted:
        common &= set(s.periods)
    keys = sorted(common)
    if len(keys) < MIN_PERIODS:
        raise InsufficientOverlap(
            f"only {len(keys)} periods common to all series, need {MIN_PERIODS}"
        )

    def pick(s: ReturnSeries) -> np.ndarray:
        pos = {p: k for k, p in enumerate(s.periods)}
        return s.values[[pos[p] for p in keys]]

    matrix = np.column_stack([pick(s) for s in accepted])
    return AlignedPanel(keys, pick(reference), matrix, [s.label for s in accepted], reference.label)


def write_panel(panel: AlignedPanel, path, *, period_column: str = DEFAULT_PERIOD_COLUMN) -> None:
    """Write ``panel`` as a wide CSV readable by :func:`load_panel`."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(format_panel_csv(panel, period_column=period_column))


def format_panel_csv(panel: AlignedPanel, *, period_column: str = DEFAULT_PERIOD_COLUMN) -> str:
    lines = [",".join([period_column, panel.reference_label, *panel.labels])]
    for t, key in enumerate(panel.period_keys):
        cells = [key, repr(float(panel.reference[t]))]
        cells += [repr(float(v)) for v in panel.accepted[t]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
