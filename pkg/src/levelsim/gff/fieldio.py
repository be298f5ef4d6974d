"""Field snapshot serialization.

Three formats: CSV rows (row, col, value) with round-trip float reprs, a
compact binary layout (magic b"LSGF", little-endian uint32 side length, then
N*N little-endian float64 values in row-major order), and level-set reports
as JSON with sorted keys.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .levels import LevelSet

__all__ = [
    "MAGIC",
    "write_field_csv",
    "read_field_csv",
    "write_field_binary",
    "read_field_binary",
    "level_set_report",
    "write_level_set_json",
]

MAGIC = b"LSGF"


def _check_square(field: np.ndarray) -> np.ndarray:
    field = np.asarray(field, dtype=float)
    if field.ndim != 2 or field.shape[0] != field.shape[1]:
        raise ValueError(f"field must be a square 2-d array, got shape {field.shape}")
    return field


def write_field_csv(field: np.ndarray, path: str | Path) -> None:
    field = _check_square(field)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "value"])
        for r in range(field.shape[0]):
            for c in range(field.shape[1]):
                writer.writerow([r, c, repr(float(field[r, c]))])


def read_field_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["row", "col", "value"]:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [(int(r), int(c), float(v)) for r, c, v in reader]
    if not rows:
        raise ValueError("empty field CSV")
    grid_n = max(r for r, _, _ in rows) + 1
    if len(rows) != grid_n * grid_n:
        raise ValueError(f"expected {grid_n * grid_n} sites, got {len(rows)}")
    field = np.full((grid_n, grid_n), np.nan)
    for r, c, v in rows:
        field[r, c] = v
    if np.isnan(field).any():
        raise ValueError("CSV does not cover every site exactly once")
    return field


def write_field_binary(field: np.ndarray, path: str | Path) -> None:
    field = _check_square(field)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sI", MAGIC, field.shape[0]))
        fh.write(field.astype("<f8").tobytes())


def read_field_binary(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise ValueError(f"not a field snapshot: bad magic in {path}")
    (grid_n,) = struct.unpack("<I", raw[4:8])
    expected = 8 + 8 * grid_n * grid_n
    if len(raw) != expected:
        raise ValueError(f"truncated snapshot: {len(raw)} bytes, expected {expected}")
    data = np.frombuffer(raw[8:], dtype="<f8")
    return data.reshape(grid_n, grid_n).copy()


def level_set_report(level: LevelSet, grid_n: int) -> dict:
    """JSON-ready summary; site list is row-major sorted."""
    return {
        "grid_n": int(grid_n),
        "eta": level.eta,
        "threshold": level.threshold,
        "count": level.count,
        "sites": [[int(r), int(c)] for r, c in level.sites],
    }


def write_level_set_json(level: LevelSet, grid_n: int, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(level_set_report(level, grid_n), fh, sort_keys=True, indent=2)
        fh.write("\n")
