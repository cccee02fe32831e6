"""File helpers: atomic writes (temp + rename), JSON/JSONL/CSV, dataset CSV."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload, *, indent: int = 2):
    atomic_write_text(path, json.dumps(payload, indent=indent, sort_keys=True) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def write_jsonl(path, records):
    lines = [json.dumps(record, sort_keys=True) for record in records]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(cell) for cell in row])
    atomic_write_text(path, buffer.getvalue())


def write_data_csv(path, data):
    """Dataset CSV with an x1..xd header and round-trip-exact float formatting."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError("dataset must be 2-D")
    header = [f"x{i + 1}" for i in range(arr.shape[1])]
    write_csv(path, header, arr.tolist())


def read_data_csv(path) -> np.ndarray:
    """Read a dataset CSV (header row skipped); validates rectangular float data."""
    with open(path, encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = list(reader)
    if len(rows) < 2:
        raise InvalidInputError(f"{path}: expected a header row plus at least one data row")
    width = len(rows[0])
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise InvalidInputError(f"{path}:{lineno}: ragged row ({len(row)} vs {width} columns)")
        try:
            data.append([float(cell) for cell in row])
        except ValueError as err:
            raise InvalidInputError(f"{path}:{lineno}: {err}") from err
    return np.asarray(data, dtype=float)
