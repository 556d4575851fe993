"""Reading adjacency matrices and writing CSV tables, sparse dumps and JSON reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .groupoid import BisectionIndex, WaveletIndex
from .markov import AdjacencyMatrix, format_word

__all__ = [
    "read_matrix",
    "parse_matrix_text",
    "format_float",
    "write_csv",
    "write_json",
    "write_sparse_triplets",
    "write_manifest",
    "to_jsonable",
]


def parse_matrix_text(text: str) -> AdjacencyMatrix:
    """Parse ``N`` on the first line followed by ``N`` rows of 0/1.

    Entries in a row may be separated by whitespace or commas, or written
    as a single digit string such as ``0110``. Lines starting with ``#`` are
    ignored.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"first line must be the size N, got {lines[0]!r}") from exc
    rows = []
    for ln in lines[1:]:
        tokens = ln.replace(",", " ").split()
        if len(tokens) == 1 and len(tokens[0]) == n and n > 1:
            tokens = list(tokens[0])
        rows.append([int(tok) for tok in tokens])
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"expected {n} rows of {n} entries")
    return AdjacencyMatrix(np.array(rows, dtype=np.int64))


def read_matrix(path: str | Path) -> AdjacencyMatrix:
    """Read an adjacency matrix from a text or JSON file.

    JSON may be a list of rows or an object with a ``matrix`` key (and an
    optional ``n`` that must agree).
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith(("[", "{")):
        data = json.loads(text)
        rows = data["matrix"] if isinstance(data, dict) else data
        if isinstance(data, dict) and "n" in data and int(data["n"]) != len(rows):
            raise ValueError("'n' does not match the number of rows")
        return AdjacencyMatrix(np.array(rows, dtype=np.int64))
    return parse_matrix_text(text)


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, (float, np.floating)) and not math.isfinite(x):
        return str(float(x))
    return "%.17g" % x


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, tuple) and all(isinstance(a, (int, np.integer)) for a in value):
        return format_word(value)
    return str(value)


def write_csv(path: str | Path, rows: Sequence[dict], columns: Sequence[str] | None = None) -> Path:
    """Write dict rows as CSV; words become digit strings and floats get 17 digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
    return path


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays, words and indices to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (BisectionIndex, WaveletIndex)):
        return str(obj)
    if isinstance(obj, tuple) and obj and all(isinstance(a, (int, np.integer)) for a in obj):
        return format_word(obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path: str | Path, report: dict) -> Path:
    """Write a report with sorted keys.

    Floats are written with the shortest repr that round-trips, so no
    precision is lost relative to 17 significant digits.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n")
    return path


def write_sparse_triplets(path: str | Path, matrix: sp.spmatrix) -> Path:
    """One line ``row col re im`` per stored entry, in row-major order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with path.open("w") as fh:
        fh.write(f"# shape {coo.shape[0]} {coo.shape[1]}\n")
        for k in order:
            z = complex(coo.data[k])
            fh.write(f"{coo.row[k]} {coo.col[k]} {format_float(z.real)} {format_float(z.imag)}\n")
    return path


def write_manifest(path: str | Path, manifest: Iterable[dict]) -> Path:
    """Basis manifest mapping window indices to ``(gamma, nu, j)``."""
    rows = list(manifest)
    return write_csv(path, rows)
