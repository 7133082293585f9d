"""Ordered result tables, their CSV form, and the parallel point runner."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["SweepTable", "parallel_map", "format_value", "parse_value"]


def format_value(x):
    """Text form used in CSV cells; floats keep all 17 significant digits."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return "%.17g" % x
    if x is None:
        return ""
    return str(x)


def parse_value(text):
    if text == "":
        return None
    try:
        n = int(text)
        if str(n) == text:  # keeps "-0" a float
            return n
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


class SweepTable:
    """Rows of sweep output plus ``key = value`` metadata.

    Parameters
    ----------
    columns : list of str
    rows : list of sequence
        Each row has one entry per column.  Floats, ints, bools, strings and
        ``None`` (empty cell) are allowed.
    metadata : dict, optional
        Written as ``# key = value`` lines above the column row.
    """

    def __init__(self, columns, rows=(), metadata=None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.metadata = dict(metadata or {})
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} cells, expected {len(self.columns)}")

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def records(self):
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_csv_text(self):
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k} = {format_value(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_value(x) for x in r])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def from_csv_text(cls, text):
        meta, body = {}, []
        for line in text.splitlines(keepends=True):
            if line.startswith("#") and not body:
                key, _, value = line[1:].strip().partition(" = ")
                meta[key] = parse_value(value)
            else:
                body.append(line)
        reader = csv.reader(body)
        columns = next(reader)
        rows = [[parse_value(x) for x in r] for r in reader]
        return cls(columns, rows, meta)

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            return cls.from_csv_text(fh.read())

    def argmin(self, name, where=None):
        """Row index minimising column ``name`` over finite values."""
        vals = self.column(name)
        best = None
        for i, x in enumerate(vals):
            if not isinstance(x, (int, float)) or not math.isfinite(x):
                continue
            if where is not None and not where(self.records()[i]):
                continue
            if best is None or x < vals[best]:
                best = i
        return best


def _guarded(fn, item):
    try:
        return fn(item), None
    except Exception as exc:  # recorded in the row, never aborts a sweep
        return None, f"{type(exc).__name__}: {exc}"


class _Guard:
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, item):
        return _guarded(self.fn, item)


def parallel_map(fn, items, jobs=None):
    """``[(fn(x), None) or (None, error_text)]`` in input order.

    ``jobs=None`` uses every available core; ``jobs=1`` runs serially in this
    process.  ``fn`` must be picklable when ``jobs > 1``.
    """
    items = list(items)
    if jobs is None:
        jobs = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    jobs = max(1, min(int(jobs), len(items) or 1))
    guard = _Guard(fn)
    if jobs == 1:
        return [guard(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(guard, items))
