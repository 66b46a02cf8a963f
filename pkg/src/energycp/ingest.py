"""Reading time series from delimited text files."""

from __future__ import annotations

import csv
import math
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import DataError

_MISSING = {"", "na", "nan", "null", "none"}


def _select(header: Optional[List[str]], ncols: int, columns, line) -> List[int]:
    if columns is None:
        return list(range(ncols))
    out = []
    for c in columns:
        c = str(c).strip()
        if header is not None and c in header:
            out.append(header.index(c))
            continue
        try:
            i = int(c)
        except ValueError:
            raise DataError(f"unknown column {c!r}", line=line)
        if not 1 <= i <= ncols:
            raise DataError(f"column number {i} outside 1..{ncols}", line=line)
        out.append(i - 1)
    if not out:
        raise DataError("no columns selected")
    return out


def _impute(values: np.ndarray, col_names: List[str]) -> None:
    """Replace non-finite cells by the mean of the nearest finite neighbours."""
    d = values.shape[1]
    for j in range(d):
        col = values[:, j]
        ok = np.isfinite(col)
        if not ok.any():
            raise DataError(f"column {col_names[j]} has no finite values to impute from")
        if ok.all():
            continue
        idx = np.flatnonzero(ok)
        for i in np.flatnonzero(~ok):
            k = np.searchsorted(idx, i)
            nbrs = []
            if k > 0:
                nbrs.append(col[idx[k - 1]])
            if k < idx.size:
                nbrs.append(col[idx[k]])
            col[i] = sum(nbrs) / len(nbrs)


def ingest_csv(path, header: bool = False, delimiter: str = ",",
               columns: Optional[Sequence[Union[str, int]]] = None,
               impute: bool = False) -> np.ndarray:
    """Load a ``(T, d)`` series, one observation per row.

    Parameters
    ----------
    path : str or path-like
    header : bool
        Skip (and use for column names) the first non-blank row.
    delimiter : str
    columns : sequence, optional
        Header names or 1-based column numbers to keep, in order.
    impute : bool
        Fill missing or non-finite cells with the mean of the nearest finite
        values before and after them in the same column. Without it such
        cells raise :class:`DataError`.

    Raises
    ------
    DataError
        Unparseable cell, ragged row, non-finite cell (without ``impute``)
        or an empty file. Line and column are reported when known.
    """
    rows: List[List[str]] = []
    lines: List[int] = []
    names: Optional[List[str]] = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for rec in reader:
            if not rec or all(not c.strip() for c in rec):
                continue
            if header and names is None:
                names = [c.strip() for c in rec]
                continue
            rows.append(rec)
            lines.append(reader.line_num)
    if not rows:
        raise DataError(f"no data rows in {path}")
    ncols = len(names) if names is not None else len(rows[0])
    sel = _select(names, ncols, columns, lines[0])
    col_names = [names[j] if names else str(j + 1) for j in sel]
    values = np.empty((len(rows), len(sel)))
    for i, (rec, line) in enumerate(zip(rows, lines)):
        if len(rec) != ncols:
            raise DataError(f"expected {ncols} fields, found {len(rec)}", line=line)
        for out_j, j in enumerate(sel):
            cell = rec[j].strip()
            if cell.lower() in _MISSING:
                v = math.nan
            else:
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"cannot parse {cell!r} as a number", line=line, column=j + 1)
            if not math.isfinite(v) and not impute:
                raise DataError(f"non-finite value {cell!r}", line=line, column=j + 1)
            values[i, out_j] = v
    if impute:
        _impute(values, col_names)
    return values
