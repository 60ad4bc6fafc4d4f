"""Immutable CSR graph and per-partition subgraphs with a halo of boundary nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph in CSR form with node data.

    Rows list neighbors in ascending id order. Self-loops are never stored.
    """

    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray

    def __post_init__(self):
        for name in ("indptr", "indices", "features", "labels",
                     "train_mask", "val_mask", "test_mask"):
            getattr(self, name).setflags(write=False)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def row_ids(self) -> np.ndarray:
        """Source node id of every CSR entry."""
        return np.repeat(np.arange(self.num_nodes), self.degrees)

    def edges(self) -> np.ndarray:
        """Undirected edges as a (E, 2) array with u < v, lexicographically sorted."""
        src = self.row_ids()
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def with_features(self, features) -> "Graph":
        return Graph(self.num_nodes, self.indptr, self.indices, np.asarray(features),
                     self.labels, self.train_mask, self.val_mask, self.test_mask)


def build_graph(edges, num_nodes: int, features=None, labels=None,
                train_mask=None, val_mask=None, test_mask=None) -> Graph:
    """Build a symmetric, deduplicated, loop-free CSR graph from an edge list."""
    n = int(num_nodes)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(e) and (e.min() < 0 or e.max() >= n):
        raise ValueError(f"edge endpoint out of range [0, {n})")
    e = e[e[:, 0] != e[:, 1]]
    both = np.concatenate([e, e[:, ::-1]])
    key = np.unique(both[:, 0] * n + both[:, 1])
    src, dst = key // n, key % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])

    if features is None:
        features = np.zeros((n, 0))
    features = np.asarray(features)
    if features.dtype.kind != "f":
        features = features.astype(np.float64)
    if features.ndim == 1:
        features = features[:, None]
    if features.shape[0] != n:
        raise ValueError(f"features have {features.shape[0]} rows, expected {n}")
    labels = np.zeros(n, dtype=np.int64) if labels is None else np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise ValueError(f"labels have shape {labels.shape}, expected ({n},)")
    masks = []
    for m in (train_mask, val_mask, test_mask):
        m = np.zeros(n, dtype=bool) if m is None else np.asarray(m, dtype=bool)
        if m.shape != (n,):
            raise ValueError(f"mask has shape {m.shape}, expected ({n},)")
        masks.append(m)
    if (masks[0] & masks[1]).any() or (masks[0] & masks[2]).any() or (masks[1] & masks[2]).any():
        raise ValueError("train/val/test masks overlap")
    return Graph(n, indptr, dst.astype(np.int64), features, labels, *masks)


@dataclass(frozen=True, eq=False)
class SubgraphWithHalo:
    """Rows for the inner nodes of one partition; columns index ``[inner; halo]``.

    Local column ``c < len(inner_ids)`` is ``inner_ids[c]``; larger columns are
    ``halo_ids[c - len(inner_ids)]``. ``edge_weight`` carries any per-edge
    rescaling applied by an edge sampler (1.0 otherwise); ``inner_degree`` is
    each inner node's degree in the full graph.
    """

    owner_partition: int
    inner_ids: np.ndarray
    halo_ids: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    edge_weight: np.ndarray
    inner_degree: np.ndarray

    @property
    def num_inner(self) -> int:
        return len(self.inner_ids)

    @property
    def num_halo(self) -> int:
        return len(self.halo_ids)

    @property
    def stack_ids(self) -> np.ndarray:
        """Global id of every local column / stacked feature row."""
        return np.concatenate([self.inner_ids, self.halo_ids])

    @property
    def global_to_local(self) -> dict:
        return {int(g): i for i, g in enumerate(self.stack_ids)}

    def row(self, local_v: int) -> np.ndarray:
        """Global ids of the columns in one inner node's row."""
        cols = self.indices[self.indptr[local_v]:self.indptr[local_v + 1]]
        return self.stack_ids[cols]


@dataclass(eq=False)
class HaloTemplate:
    """Local structure of a partition against its *full* boundary set.

    Built once; :meth:`restrict` then cuts it down to a sampled halo cheaply
    every epoch.
    """

    owner_partition: int
    inner_ids: np.ndarray
    boundary_ids: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray  # local cols: inner first, then boundary
    col_gid: np.ndarray  # global id of each CSR entry's column
    row_gid: np.ndarray  # global id of each CSR entry's row
    inner_degree: np.ndarray
    _rows_local: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls, graph: Graph, inner_ids, owner_partition: int = 0) -> "HaloTemplate":
        inner = np.unique(np.asarray(inner_ids, dtype=np.int64))
        deg = graph.degrees[inner]
        starts = graph.indptr[inner]
        # gather the CSR rows of the inner nodes
        offs = np.repeat(starts - np.concatenate([[0], np.cumsum(deg)[:-1]]), deg)
        pos = np.arange(int(deg.sum()), dtype=np.int64) + offs
        col_gid = graph.indices[pos]
        row_gid = np.repeat(inner, deg)
        is_inner = np.isin(col_gid, inner, assume_unique=False)
        boundary = np.unique(col_gid[~is_inner])
        local = np.empty(len(col_gid), dtype=np.int64)
        local[is_inner] = np.searchsorted(inner, col_gid[is_inner])
        local[~is_inner] = len(inner) + np.searchsorted(boundary, col_gid[~is_inner])
        indptr = np.zeros(len(inner) + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        return cls(owner_partition, inner, boundary, indptr, local, col_gid, row_gid,
                   deg.astype(np.int64), np.repeat(np.arange(len(inner)), deg))

    @property
    def num_inner(self) -> int:
        return len(self.inner_ids)

    def restrict(self, halo_selected: np.ndarray, edge_keep=None, edge_weight=None) -> SubgraphWithHalo:
        """Keep edges to inner nodes and to selected boundary nodes.

        ``halo_selected`` is a boolean mask over ``boundary_ids``.
        ``edge_keep``/``edge_weight`` optionally drop or rescale individual CSR
        entries (edge samplers); a boundary node whose every edge is dropped
        must not be selected.
        """
        n_in = self.num_inner
        halo_selected = np.asarray(halo_selected, dtype=bool)
        col_is_inner = self.indices < n_in
        keep = col_is_inner.copy()
        keep[~col_is_inner] = halo_selected[self.indices[~col_is_inner] - n_in]
        if edge_keep is not None:
            keep &= edge_keep
        new_halo_pos = np.cumsum(halo_selected) - 1
        cols = self.indices[keep]
        halo_cols = cols >= n_in
        cols = cols.copy()
        cols[halo_cols] = n_in + new_halo_pos[cols[halo_cols] - n_in]
        indptr = np.zeros(n_in + 1, dtype=np.int64)
        np.cumsum(np.bincount(self._rows_local[keep], minlength=n_in), out=indptr[1:])
        w = np.ones(len(cols)) if edge_weight is None else np.asarray(edge_weight, dtype=np.float64)[keep]
        return SubgraphWithHalo(self.owner_partition, self.inner_ids,
                                self.boundary_ids[halo_selected], indptr, cols, w,
                                self.inner_degree)


def induced_subgraph(graph: Graph, inner_ids, halo_ids, owner_partition: int = 0) -> SubgraphWithHalo:
    """Node-induced subgraph over ``inner ∪ halo`` keeping only inner-node rows."""
    tmpl = HaloTemplate.build(graph, inner_ids, owner_partition)
    halo = np.unique(np.asarray(halo_ids, dtype=np.int64))
    if np.isin(halo, tmpl.inner_ids).any():
        raise ValueError("halo ids overlap inner ids")
    bad = halo[~np.isin(halo, tmpl.boundary_ids)]
    if len(bad):
        raise ValueError(f"halo ids {bad.tolist()} are not adjacent to any inner node")
    return tmpl.restrict(np.isin(tmpl.boundary_ids, halo))
