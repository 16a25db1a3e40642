"""Undirected simple graphs in CSR form, edge-list I/O and exact counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from . import kernels
from .rng import stream


class EdgeListParseError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line.rstrip()!r}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    ``indptr``/``indices`` hold the adjacency in CSR form; every neighbor row
    is sorted ascending. ``original_ids[i]`` is the raw ID node ``i`` had in
    its source file (``None`` when the graph was built in memory).
    """

    indptr: np.ndarray
    indices: np.ndarray
    original_ids: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.original_ids):
            if arr is not None:
                arr.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, edges, original_ids=None) -> "Graph":
        """Build from an iterable/array of ``(u, v)`` pairs.

        Self-loops and duplicate (including reversed) pairs are dropped.
        """
        if n < 1:
            raise ValueError("a graph needs at least one node")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        e = np.sort(e, axis=1)
        e = np.unique(e, axis=0)
        both = np.concatenate([e, e[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=n), out=indptr[1:])
        ids = None if original_ids is None else np.asarray(original_ids, dtype=np.int64)
        return cls(indptr, np.ascontiguousarray(both[:, 1]), ids)

    @property
    def node_count(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def edge_count(self) -> int:
        return self.indices.shape[0] // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        row = self.neighbors(i)
        pos = np.searchsorted(row, j)
        return bool(pos < row.shape[0] and row[pos] == j)

    def edges(self) -> np.ndarray:
        """Canonical ``(m, 2)`` edge array with ``u < v``, sorted by ``(u, v)``."""
        rows = np.repeat(np.arange(self.node_count, dtype=np.int64), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def edge_index(self, u, v) -> np.ndarray:
        """Positions of pairs in :meth:`edges`; -1 where the pair is not an edge."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        e = self.edges()
        if e.shape[0] == 0:
            return np.full(lo.shape, -1, dtype=np.int64)
        key = e[:, 0] * self.node_count + e[:, 1]
        want = lo * self.node_count + hi
        pos_c = np.minimum(np.searchsorted(key, want), key.shape[0] - 1)
        found = key[pos_c] == want
        return np.where(found, pos_c, -1)

    def relabel(self, new_of_old: np.ndarray) -> "Graph":
        """Graph with node ``old`` renamed to ``new_of_old[old]``."""
        new_of_old = np.asarray(new_of_old, dtype=np.int64)
        e = self.edges()
        ids = None
        if self.original_ids is not None:
            ids = np.empty_like(self.original_ids)
            ids[new_of_old] = self.original_ids
        return Graph.from_edges(self.node_count, new_of_old[e], ids)

    def same_as(self, other: "Graph") -> bool:
        return (
            np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def dense(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count), dtype=bool)
        e = self.edges()
        a[e[:, 0], e[:, 1]] = True
        a[e[:, 1], e[:, 0]] = True
        return a


@dataclass(frozen=True)
class DatasetMeta:
    node_count: int
    edge_count: int
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0

    @property
    def average_degree(self) -> float:
        return 2.0 * self.edge_count / self.node_count

    @property
    def edges_per_node(self) -> float:
        # Table-style "average degree" figures for SNAP graphs are often E/n.
        return self.edge_count / self.node_count


def meta_of(g: Graph) -> DatasetMeta:
    return DatasetMeta(g.node_count, g.edge_count)


# edge-list I/O --------------------------------------------------------------

_COMPACT_TAG = "# fgrdp-compact nodes="


def load_edge_list(lines: Iterable[str] | TextIO) -> tuple[Graph, DatasetMeta]:
    """Parse a SNAP-style edge list.

    Raw IDs are compacted to ``[0, n)`` in order of first appearance, unless
    the file carries the ``# fgrdp-compact nodes=N`` header written by
    :func:`write_edge_list`, in which case IDs are taken as already dense.
    """
    ids: dict[int, int] = {}
    pairs: list[tuple[int, int]] = []
    declared_n = None
    self_loops = 0
    saw_data = False
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped.startswith(_COMPACT_TAG) and not saw_data:
                try:
                    declared_n = int(stripped[len(_COMPACT_TAG):].split()[0])
                except (ValueError, IndexError):
                    raise EdgeListParseError(lineno, line, "bad compact header") from None
            continue
        saw_data = True
        tok = stripped.split()
        if len(tok) < 2:
            raise EdgeListParseError(lineno, line, "expected two node IDs")
        try:
            a, b = int(tok[0]), int(tok[1])
        except ValueError:
            raise EdgeListParseError(lineno, line, "non-integer node ID") from None
        if a < 0 or b < 0:
            raise EdgeListParseError(lineno, line, "negative node ID")
        if declared_n is None:
            a = ids.setdefault(a, len(ids))
            b = ids.setdefault(b, len(ids))
        elif a >= declared_n or b >= declared_n:
            raise EdgeListParseError(lineno, line, f"ID exceeds declared node count {declared_n}")
        if a == b:
            self_loops += 1
            continue
        pairs.append((a, b))

    if declared_n is None:
        if not ids:
            raise ValueError("edge list contains no data lines")
        n = len(ids)
        original = np.fromiter(ids.keys(), dtype=np.int64, count=n)
    else:
        n = declared_n
        original = np.arange(n, dtype=np.int64)
    g = Graph.from_edges(n, pairs if pairs else np.empty((0, 2), dtype=np.int64), original)
    meta = DatasetMeta(n, g.edge_count, self_loops, len(pairs) - g.edge_count)
    return g, meta


def write_edge_list(g: Graph, out: TextIO, comment: str | None = None) -> None:
    """Write ``u v`` lines (``u < v``, compacted IDs) under a metadata header."""
    meta = meta_of(g)
    if comment:
        out.write(f"# {comment}\n")
    out.write(f"{_COMPACT_TAG}{g.node_count}\n")
    out.write(
        f"# Nodes: {meta.node_count} Edges: {meta.edge_count} "
        f"AvgDegree: {meta.average_degree:.6g}\n"
    )
    for u, v in g.edges():
        out.write(f"{u} {v}\n")


# sampling and generators -----------------------------------------------------


def induced_subgraph(g: Graph, nodes: np.ndarray) -> Graph:
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    new_id = np.full(g.node_count, -1, dtype=np.int64)
    new_id[nodes] = np.arange(nodes.shape[0])
    e = g.edges()
    mapped = new_id[e]
    keep = (mapped >= 0).all(axis=1)
    ids = None if g.original_ids is None else g.original_ids[nodes]
    return Graph.from_edges(nodes.shape[0], mapped[keep], ids)


def sample_induced_subgraph(g: Graph, n: int, seed: int) -> Graph:
    """Uniformly sample ``n`` nodes and keep the edges among them.

    Sampled nodes keep their relative order, so ``n == g.node_count`` returns
    a graph identical to ``g``.
    """
    if not 1 <= n <= g.node_count:
        raise ValueError(f"sample size {n} outside [1, {g.node_count}]")
    rng = stream(seed, "sample", n)
    chosen = rng.choice(g.node_count, size=n, replace=False)
    return induced_subgraph(g, chosen)


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = stream(seed, "erdos-renyi", n)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.shape[0]) < p
    return Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def barabasi_albert(n: int, m: int, seed: int) -> Graph:
    import networkx as nx

    seed32 = int(stream(seed, "barabasi-albert", n, m).integers(0, 2**32 - 1))
    h = nx.barabasi_albert_graph(n, m, seed=seed32)
    return Graph.from_edges(n, np.array(h.edges(), dtype=np.int64).reshape(-1, 2))


# exact counts ----------------------------------------------------------------


def max_degree(g: Graph) -> int:
    d = g.degrees
    return int(d.max()) if d.size else 0


def exact_triangle_count(g: Graph) -> int:
    return kernels.forward_triangles(g.indptr, g.indices)


def exact_kstar_count(g: Graph, k: int) -> int:
    """Number of k-stars, ``sum_i C(d_i, k)``, as an exact integer."""
    if k < 2:
        raise ValueError("k-stars need k >= 2")
    values, counts = np.unique(g.degrees, return_counts=True)
    return sum(int(c) * math.comb(int(d), k) for d, c in zip(values, counts))
