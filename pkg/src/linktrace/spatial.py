"""Adapter turning gridded spatial counts into a partially directed network.

Each grid cell becomes a node. For adjacent cells i and j there is a link
i -> j exactly when cell i is occupied (count_i >= threshold), so occupied
cells point at every neighbor, empty cells point at nothing, and a pair of
occupied neighbors gets the symmetric pair. Cell counts ride along as a
numeric attribute so the spatial case plugs straight into the estimators.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .graph import AttributeTable, Network


class SpatialError(ValueError):
    pass


class Adjacency(enum.Enum):
    ROOK = "rook"    # edge-sharing neighbors
    QUEEN = "queen"  # edge- or corner-sharing neighbors


@dataclass(frozen=True)
class SpatialRule:
    threshold: float = 1.0
    adjacency: Adjacency = Adjacency.ROOK

    def __post_init__(self):
        if self.threshold <= 0.0:
            raise SpatialError(f"threshold must be positive, got {self.threshold}")


@dataclass
class Grid:
    rows: int
    cols: int
    counts: np.ndarray  # (rows, cols), non-negative

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.rows < 1 or self.cols < 1:
            raise SpatialError("grid must have positive dimensions")
        if self.counts.shape != (self.rows, self.cols):
            raise SpatialError(
                f"counts shape {self.counts.shape} does not match "
                f"{self.rows}x{self.cols}")
        if np.any(self.counts < 0) or not np.all(np.isfinite(self.counts)):
            raise SpatialError("counts must be finite and non-negative")


def cell_label(index: int) -> str:
    """Spreadsheet-style label for the cell at row-major position index:
    A..Z, then AA, AB, ..."""
    index += 1  # bijective base 26
    out = []
    while index:
        index, r = divmod(index - 1, 26)
        out.append(chr(ord("A") + r))
    return "".join(reversed(out))


_ROOK = ((-1, 0), (1, 0), (0, -1), (0, 1))
_QUEEN = _ROOK + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def grid_to_network(grid: Grid, rule: SpatialRule | None = None):
    """Build the occupancy network and its count attribute table.

    Returns (Network, AttributeTable); nodes are cells in row-major order
    with spreadsheet labels, the table has one numeric column "count".
    """
    rule = rule or SpatialRule()
    offs = _ROOK if rule.adjacency is Adjacency.ROOK else _QUEEN
    flat = grid.counts.ravel()
    occupied = flat >= rule.threshold
    pairs = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            i = r * grid.cols + c
            if not occupied[i]:
                continue
            for dr, dc in offs:
                rr, cc = r + dr, c + dc
                if 0 <= rr < grid.rows and 0 <= cc < grid.cols:
                    pairs.append((i, rr * grid.cols + cc))
    labels = [cell_label(i) for i in range(grid.rows * grid.cols)]
    net = Network(labels, pairs)
    attrs = AttributeTable.from_arrays({"count": flat}, net.node_count)
    return net, attrs


def load_grid(path) -> Grid:
    """Read a grid file: a "rows cols" header line, then one line per row
    of whitespace-separated counts. "#" lines are comments."""
    rows = cols = None
    data = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = text.split()
            if rows is None:
                if len(fields) != 2:
                    raise SpatialError(f"{path}:{lineno}: header must be 'rows cols'")
                try:
                    rows, cols = int(fields[0]), int(fields[1])
                except ValueError:
                    raise SpatialError(f"{path}:{lineno}: bad header") from None
                if rows < 1 or cols < 1:
                    raise SpatialError(f"{path}:{lineno}: dimensions must be positive")
                continue
            if len(fields) != cols:
                raise SpatialError(
                    f"{path}: row {len(data)} has {len(fields)} cells, expected {cols}")
            try:
                data.append([float(x) for x in fields])
            except ValueError:
                raise SpatialError(f"{path}:{lineno}: non-numeric count") from None
    if rows is None:
        raise SpatialError(f"{path}: empty grid file")
    if len(data) != rows:
        raise SpatialError(f"{path}: expected {rows} rows, got {len(data)}")
    return Grid(rows=rows, cols=cols, counts=np.asarray(data))
