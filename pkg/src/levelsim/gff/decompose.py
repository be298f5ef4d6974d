"""Harmonic splitting of a field over nested boxes.

Over a box D the field splits as field = harmonic + residual, where harmonic
extends the frame values of D and the residual is a zero-boundary field on D
independent of everything outside. Evaluating the harmonic part of a child
box at the child's center gives the coarse value of the field at that scale;
differences of coarse values across one nesting step are the increments whose
variances grow linearly in the scale gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .green import _lu, dirichlet_extend
from .grid import Box, NestedPartitions

__all__ = [
    "HarmonicDecomposition",
    "decompose",
    "harmonic_at",
    "coarse_values",
    "coarse_increments",
    "coarse_field",
    "increment_samples",
]


@dataclass(frozen=True)
class HarmonicDecomposition:
    """Field restricted to a box, split into harmonic and residual parts."""

    box: Box
    harmonic: np.ndarray
    residual: np.ndarray
    center_site: tuple[int, int]
    center_value: float


def decompose(field: np.ndarray, box: Box) -> HarmonicDecomposition:
    """Split field over box; the residual is exactly zero on the box frame."""
    harmonic = dirichlet_extend(field, box)
    residual = field[box.slices()] - harmonic
    center = box.center()
    value = float(harmonic[center[0] - box.row0, center[1] - box.col0])
    return HarmonicDecomposition(box, harmonic, residual, center, value)


def _require_site(box: Box, site: tuple[int, int]) -> tuple[int, int]:
    r, c = site
    if not (box.row0 <= r < box.row_end and box.col0 <= c < box.col_end):
        raise ValueError(f"site {site} is outside {box}")
    return r - box.row0, c - box.col0


def harmonic_at(fields: np.ndarray, box: Box, site: tuple[int, int]) -> np.ndarray:
    """Harmonic extension over box evaluated at one site, batched.

    fields is (k, N, N) or (N, N); returns (k,) or a scalar to match. Frame
    sites and boxes of side <= 2 reduce to the raw field values.
    """
    fields = np.asarray(fields, dtype=float)
    squeeze = fields.ndim == 2
    if squeeze:
        fields = fields[None]
    lr, lc = _require_site(box, site)
    on_frame = lr in (0, box.height - 1) or lc in (0, box.width - 1)
    if box.height <= 2 or box.width <= 2 or on_frame:
        vals = fields[:, site[0], site[1]].copy()
    else:
        sub = fields[(slice(None), *box.slices())]
        nr, nc = box.height - 2, box.width - 2
        k = fields.shape[0]
        rhs = np.zeros((k, nr, nc))
        rhs[:, 0, :] += sub[:, 0, 1:-1]
        rhs[:, -1, :] += sub[:, -1, 1:-1]
        rhs[:, :, 0] += sub[:, 1:-1, 0]
        rhs[:, :, -1] += sub[:, 1:-1, -1]
        solved = _lu(nr, nc).solve(rhs.reshape(k, nr * nc).T)
        vals = np.atleast_2d(solved.T)[:, (lr - 1) * nc + (lc - 1)].copy()
    return float(vals[0]) if squeeze else vals


def coarse_values(fields: np.ndarray, box: Box) -> np.ndarray:
    """Coarse value of each field at box scale: harmonic part at the center."""
    return harmonic_at(fields, box, box.center())


def coarse_increments(fields: np.ndarray, parent: Box, child: Box) -> np.ndarray:
    """Coarse-value increments child minus parent, both read at the child
    center. Requires the child frame strictly inside the parent, so the
    increment is a functional of the parent's residual part alone."""
    if parent.boundary_gap(child) < 1:
        raise ValueError(
            f"child {child} touches the frame of parent {parent}; "
            "increments need the child frame strictly interior"
        )
    site = child.center()
    return harmonic_at(fields, child, site) - harmonic_at(fields, parent, site)


def coarse_field(field: np.ndarray, boxes: Iterable[Box]) -> dict[Box, float]:
    """Coarse value of the field on each box, one Dirichlet solve apiece."""
    return {box: float(coarse_values(field, box)) for box in boxes}


def increment_samples(
    fields: np.ndarray, partitions: NestedPartitions, level: int | None = None
) -> np.ndarray:
    """Coarse increments pooled over parent/child pairs of the hierarchy.

    level i restricts to pairs between levels i and i+1; None pools every
    nesting step. Output is flat, one entry per (field, pair). Increments at
    different boxes of one field are dependent draws, but pooling them still
    estimates the common per-step variance without bias.
    """
    if level is None:
        steps = range(partitions.depth)
    else:
        if not 0 <= level < partitions.depth:
            raise ValueError(f"level must lie in [0, {partitions.depth}), got {level}")
        steps = range(level, level + 1)
    chunks = []
    for i in steps:
        for j, child_idx in enumerate(partitions.children[i]):
            parent = partitions.levels[i][j]
            for k in child_idx:
                chunks.append(coarse_increments(fields, parent, partitions.levels[i + 1][k]))
    if not chunks:
        raise ValueError("hierarchy has no parent/child pairs at the requested level")
    return np.concatenate([np.atleast_1d(c) for c in chunks])
