"""Strict readers for the two CSV contracts.

errors.csv carries `t,e_1,...,e_N` (one row per sample); sweep.csv
carries `N,l2l2_norm`.  Headers must match exactly; the first mismatched
column is named in the error.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import EmptyDataError, HeaderError, PlotkitError


def _load(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderError(f"{path}: file is empty") from None
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyDataError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as err:
        raise PlotkitError(f"{path}: non-numeric data row: {err}") from err
    if data.shape[1] != len(header):
        raise PlotkitError(
            f"{path}: row width {data.shape[1]} does not match header width {len(header)}"
        )
    return header, data


def _check_header(path: str, header: list[str], expected: list[str]) -> None:
    for got, want in zip(header, expected):
        if got != want:
            raise HeaderError(
                f"{path}: expected column {want!r}, found {got!r}", column=got
            )
    if len(header) != len(expected):
        extra = header[len(expected) :] or expected[len(header) :]
        raise HeaderError(
            f"{path}: header has {len(header)} columns, expected {len(expected)}",
            column=extra[0],
        )


def read_error_traces(path: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Return (t, errors, labels) from an errors.csv file."""
    header, data = _load(path)
    if not header or header[0] != "t":
        raise HeaderError(
            f"{path}: expected leading column 't', found {header[0] if header else ''!r}",
            column=header[0] if header else "",
        )
    expected = ["t"] + [f"e_{k}" for k in range(1, len(header))]
    _check_header(path, header, expected)
    if len(header) < 2:
        raise HeaderError(f"{path}: no error columns after 't'", column="t")
    return data[:, 0], data[:, 1:], header[1:]


def read_norm_sweep(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Return (N, norms) from a sweep.csv file."""
    header, data = _load(path)
    _check_header(path, header, ["N", "l2l2_norm"])
    return data[:, 0], data[:, 1]
