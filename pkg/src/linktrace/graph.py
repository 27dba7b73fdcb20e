"""Immutable network container plus the edge-list and attribute-file loaders.

Nodes are dense integer ids 0..n-1 with a label table mapping survey labels to
ids. Links are stored as ordered pairs in a CSR layout; an undirected link is
present as both ordered pairs. Self loops and duplicate pairs are rejected at
construction, and neighbor arrays are sorted ascending so identical inputs
always produce identical structures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Raised for malformed networks or unreadable network files."""


class MissingPolicy(enum.Enum):
    """How load_attributes resolves a missing cell."""

    ZERO = "zero"
    ERROR = "error"


class Network:
    """Finite population (or sample) network with labeled nodes.

    Parameters
    ----------
    labels : sequence of str
        One label per node; position in the sequence is the node id.
    pairs : array-like of shape (k, 2)
        Ordered (source, destination) id pairs. Callers representing an
        undirected link must pass both orientations; `from_undirected`
        does this for you.
    back_map : ndarray, optional
        For subgraphs, the parent id of each node here. None for root
        networks.
    """

    __slots__ = ("_labels", "_label_to_id", "_indptr", "_nbrs", "back_map")

    def __init__(self, labels, pairs, back_map=None):
        self._labels = tuple(str(x) for x in labels)
        n = len(self._labels)
        self._label_to_id = {lab: i for i, lab in enumerate(self._labels)}
        if len(self._label_to_id) != n:
            raise GraphError("duplicate node label")

        arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                         dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise GraphError("pairs must be (k, 2) shaped")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise GraphError("link endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphError("self loop")

        # Sort by (src, dst), then drop duplicate ordered pairs.
        if arr.shape[0]:
            order = np.lexsort((arr[:, 1], arr[:, 0]))
            arr = arr[order]
            keep = np.ones(arr.shape[0], dtype=bool)
            keep[1:] = np.any(arr[1:] != arr[:-1], axis=1)
            arr = arr[keep]

        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(arr[:, 0], minlength=n), out=self._indptr[1:])
        self._nbrs = np.ascontiguousarray(arr[:, 1])
        self._indptr.setflags(write=False)
        self._nbrs.setflags(write=False)
        self.back_map = back_map

    @classmethod
    def from_undirected(cls, labels, edges):
        """Build a network from unordered edges, storing both orientations."""
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        both = np.vstack([e, e[:, ::-1]]) if e.size else e
        return cls(labels, both)

    # -- basic accessors ---------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._labels)

    @property
    def link_count(self) -> int:
        """Number of stored ordered pairs (an undirected link counts twice)."""
        return int(self._nbrs.shape[0])

    @property
    def labels(self) -> tuple:
        return self._labels

    def label(self, i: int) -> str:
        return self._labels[i]

    def id_of(self, label: str) -> int:
        try:
            return self._label_to_id[label]
        except KeyError:
            raise GraphError(f"unknown node label {label!r}") from None

    def _check_id(self, i: int):
        if not 0 <= i < len(self._labels):
            raise GraphError(f"node id {i} out of range")

    def degree(self, i: int) -> int:
        self._check_id(i)
        return int(self._indptr[i + 1] - self._indptr[i])

    def degrees(self) -> np.ndarray:
        """Out-degree of every node."""
        return np.diff(self._indptr)

    def out_neighbors(self, i: int) -> np.ndarray:
        """Ascending neighbor ids of node i (read-only view)."""
        self._check_id(i)
        return self._nbrs[self._indptr[i]:self._indptr[i + 1]]

    def has_link(self, i: int, j: int) -> bool:
        row = self.out_neighbors(i)
        k = np.searchsorted(row, j)
        return bool(k < row.shape[0] and row[k] == j)

    def neighbors_of_many(self, nodes: np.ndarray):
        """Concatenated out-links of `nodes`.

        Returns
        -------
        srcs, dsts : ndarray
            Aligned source and destination ids, one entry per out-link,
            grouped by the order of `nodes`.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        if nodes.size == 1:
            i = int(nodes[0])
            row = self._nbrs[self._indptr[i]:self._indptr[i + 1]]
            return np.full(row.size, i, dtype=np.int64), row
        starts = self._indptr[nodes]
        lens = self._indptr[nodes + 1] - starts
        total = int(lens.sum())
        if total == 0:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        cum = np.cumsum(lens)
        # Index k of the concatenation maps to starts[i] + (k - cum[i-1]).
        offsets = np.repeat(starts - (cum - lens), lens)
        idx = offsets + np.arange(total, dtype=np.int64)
        return np.repeat(nodes, lens), self._nbrs[idx]

    # -- derived structures ------------------------------------------------

    def to_edge_list_text(self) -> str:
        """Canonical edge-list serialization.

        Symmetric pairs are written once as "a b"; one-way pairs as
        "a b ->". Equal networks serialize to byte-identical text.
        """
        lines = []
        for i in range(self.node_count):
            for j in self.out_neighbors(i):
                j = int(j)
                if self.has_link(j, i):
                    if i < j:
                        lines.append(f"{self._labels[i]} {self._labels[j]}")
                else:
                    lines.append(f"{self._labels[i]} {self._labels[j]} ->")
        return "\n".join(lines) + ("\n" if lines else "")

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self._labels == other._labels
                and np.array_equal(self._indptr, other._indptr)
                and np.array_equal(self._nbrs, other._nbrs))

    def __repr__(self):
        return f"Network(nodes={self.node_count}, ordered_pairs={self.link_count})"


def induced_subgraph(net: Network, nodes) -> Network:
    """Subgraph on `nodes` with ids remapped to 0..k-1 in ascending parent order.

    The returned network keeps the parent labels and records the parent id
    of each new node in `back_map`.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size == 0:
        return Network([], np.zeros((0, 2), dtype=np.int64), back_map=nodes)
    if nodes[0] < 0 or nodes[-1] >= net.node_count:
        raise GraphError("node id out of range")
    new_id = np.full(net.node_count, -1, dtype=np.int64)
    new_id[nodes] = np.arange(nodes.size)
    srcs, dsts = net.neighbors_of_many(nodes)
    keep = new_id[dsts] >= 0
    pairs = np.column_stack([new_id[srcs[keep]], new_id[dsts[keep]]])
    labels = [net.label(int(i)) for i in nodes]
    return Network(labels, pairs, back_map=nodes)


# ---------------------------------------------------------------------------
# attribute table


@dataclass
class AttributeColumn:
    values: np.ndarray          # float64, resolved per missing policy
    missing: np.ndarray         # bool mask of cells that were missing
    kind: str                   # "binary" | "numeric"


@dataclass
class AttributeTable:
    """Per-node attribute columns, aligned to a network's node ids."""

    node_count: int
    columns: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, node_count: int) -> "AttributeTable":
        return cls(node_count=node_count)

    @classmethod
    def from_arrays(cls, arrays: dict, node_count: int) -> "AttributeTable":
        """Build from name -> value-array with no missing cells."""
        table = cls(node_count=node_count)
        for name, vals in arrays.items():
            table.add(name, np.asarray(vals, dtype=np.float64))
        return table

    def add(self, name: str, values: np.ndarray, missing: np.ndarray | None = None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.node_count,):
            raise GraphError(f"column {name!r} has wrong length")
        if missing is None:
            missing = np.zeros(self.node_count, dtype=bool)
        kind = "binary" if np.all(np.isin(values, (0.0, 1.0))) else "numeric"
        self.columns[name] = AttributeColumn(values, np.asarray(missing, bool), kind)

    @property
    def names(self) -> tuple:
        return tuple(self.columns)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name].values
        except KeyError:
            raise GraphError(f"unknown attribute {name!r}") from None

    def kind(self, name: str) -> str:
        self.column(name)
        return self.columns[name].kind

    def subset(self, indices) -> "AttributeTable":
        indices = np.asarray(indices, dtype=np.int64)
        out = AttributeTable(node_count=int(indices.size))
        for name, col in self.columns.items():
            out.columns[name] = AttributeColumn(
                col.values[indices].copy(), col.missing[indices].copy(), col.kind)
        return out


# ---------------------------------------------------------------------------
# file loaders


def read_edge_pairs(path, directed: bool = False):
    """Parse an edge-list file into (labels, ordered id pairs).

    Labels get dense ids in first appearance order. See load_edge_list for
    the line syntax.
    """
    labels: list = []
    ids: dict = {}
    pairs: list = []

    def intern(lab: str) -> int:
        if lab not in ids:
            ids[lab] = len(labels)
            labels.append(lab)
        return ids[lab]

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = text.split()
            if len(fields) == 3 and fields[2] == "->":
                if not directed:
                    raise GraphError(
                        f"{path}:{lineno}: one-way marker needs the directed flag")
                one_way = True
            elif len(fields) == 2:
                one_way = False
            else:
                raise GraphError(f"{path}:{lineno}: malformed line {text!r}")
            a, b = intern(fields[0]), intern(fields[1])
            if a == b:
                raise GraphError(f"{path}:{lineno}: self loop on {fields[0]!r}")
            pairs.append((a, b))
            if not one_way:
                pairs.append((b, a))
    return labels, pairs


def load_edge_list(path, directed: bool = False) -> Network:
    """Read a whitespace-separated edge list.

    Each non-comment line is "a b" for an undirected link or, when
    `directed` is true, "a b ->" for a one-way link from a to b. Lines
    starting with "#" are comments. Labels get dense ids in first
    appearance order, so reloading a file reproduces the same network
    byte for byte.
    """
    labels, pairs = read_edge_pairs(path, directed)
    if not labels:
        raise GraphError(f"{path}: empty edge list")
    return Network(labels, pairs)


def load_attributes(path, net: Network, missing_policy: MissingPolicy) -> AttributeTable:
    """Read a header CSV whose first column holds node labels.

    Every known node ends up with one value per column. Cells absent from
    the file (empty cells or whole missing rows) resolve per
    `missing_policy`: ZERO fills 0 and flags the cell, ERROR raises.
    """
    import csv

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise GraphError(f"{path}: empty attribute file") from None
        names = [h.strip() for h in header[1:]]
        if not names or any(not n for n in names):
            raise GraphError(f"{path}: bad header")
        if len(set(names)) != len(names):
            raise GraphError(f"{path}: duplicate column name")

        n = net.node_count
        values = np.zeros((len(names), n), dtype=np.float64)
        missing = np.ones((len(names), n), dtype=bool)
        seen = np.zeros(n, dtype=bool)

        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            label = row[0].strip()
            i = net.id_of(label)  # raises GraphError for unknown labels
            if seen[i]:
                raise GraphError(f"{path}:{lineno}: duplicate row for {label!r}")
            seen[i] = True
            cells = row[1:]
            if len(cells) > len(names):
                raise GraphError(f"{path}:{lineno}: too many cells")
            for c, name in enumerate(names):
                cell = cells[c].strip() if c < len(cells) else ""
                if not cell:
                    continue
                try:
                    values[c, i] = float(cell)
                except ValueError:
                    raise GraphError(
                        f"{path}:{lineno}: non-numeric value {cell!r} "
                        f"in column {name!r}") from None
                missing[c, i] = False

    if missing_policy is MissingPolicy.ERROR and missing.any():
        c, i = np.argwhere(missing)[0]
        raise GraphError(
            f"{path}: missing value for node {net.label(int(i))!r} "
            f"in column {names[int(c)]!r}")

    table = AttributeTable(node_count=net.node_count)
    for c, name in enumerate(names):
        table.add(name, values[c], missing[c])
    return table


def write_attributes_csv(table: AttributeTable, labels, path, label_header="node"):
    """Write an attribute table back out in load_attributes format."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([label_header, *table.names])
        for i, lab in enumerate(labels):
            writer.writerow([lab] + [repr(float(table.column(n)[i]))
                                     for n in table.names])
