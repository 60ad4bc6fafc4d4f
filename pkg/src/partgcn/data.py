"""Synthetic SBM graphs and the on-disk dataset directory format.

A dataset directory holds::

    edges.tsv     two integer ids per line (each undirected edge once)
    features.csv  one comma-separated feature row per node
    labels.txt    one class id per line
    split.txt     one of train / val / test / none per line
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, build_graph


@dataclass(frozen=True)
class SbmSpec:
    blocks: int
    nodes_per_block: int
    p_in: float
    p_out: float
    feature_dim: int = 16
    mean_scale: float = 1.0  # std of the per-block mean vectors; noise is unit
    split: tuple = (0.6, 0.2, 0.2)

    def __post_init__(self):
        if not (0 <= self.p_in <= 1 and 0 <= self.p_out <= 1):
            raise ValueError("edge probabilities must be in [0, 1]")
        if self.blocks < 1 or self.nodes_per_block < 1:
            raise ValueError("need at least one block of one node")
        if len(self.split) != 3 or min(self.split) < 0 or abs(sum(self.split) - 1) > 1e-9:
            raise ValueError("split fractions must be three nonnegative numbers summing to 1")

    @property
    def num_nodes(self) -> int:
        return self.blocks * self.nodes_per_block

    def expected_edges(self) -> float:
        k, s = self.blocks, self.nodes_per_block
        return k * s * (s - 1) / 2 * self.p_in + k * (k - 1) / 2 * s * s * self.p_out


def generate_sbm(spec: SbmSpec, seed: int = 0) -> Graph:
    """Planted-partition graph; labels are block ids, features block-mean Gaussians."""
    rng = np.random.default_rng(seed)
    n, s = spec.num_nodes, spec.nodes_per_block
    block = np.repeat(np.arange(spec.blocks), s)
    edges = []
    for a in range(spec.blocks):
        for b in range(a, spec.blocks):
            if a == b:
                iu, ju = np.triu_indices(s, k=1)
                hit = rng.random(len(iu)) < spec.p_in
                edges.append(np.stack([a * s + iu[hit], a * s + ju[hit]], axis=1))
            else:
                hit = rng.random((s, s)) < spec.p_out
                ii, jj = np.nonzero(hit)
                edges.append(np.stack([a * s + ii, b * s + jj], axis=1))
    edges = np.concatenate(edges) if edges else np.empty((0, 2), dtype=np.int64)

    means = rng.normal(0.0, spec.mean_scale, size=(spec.blocks, spec.feature_dim))
    features = means[block] + rng.normal(size=(n, spec.feature_dim))

    order = rng.permutation(n)
    n_train = int(round(spec.split[0] * n))
    n_val = int(round(spec.split[1] * n))
    masks = [np.zeros(n, dtype=bool) for _ in range(3)]
    masks[0][order[:n_train]] = True
    masks[1][order[n_train:n_train + n_val]] = True
    masks[2][order[n_train + n_val:]] = spec.split[2] > 0
    return build_graph(edges, n, features, block, *masks)


def save_dataset(graph: Graph, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    np.savetxt(d / "edges.tsv", graph.edges(), fmt="%d", delimiter="\t")
    np.savetxt(d / "features.csv", graph.features, fmt="%.17g", delimiter=",")
    np.savetxt(d / "labels.txt", graph.labels, fmt="%d")
    split = np.full(graph.num_nodes, "none", dtype=object)
    split[graph.train_mask] = "train"
    split[graph.val_mask] = "val"
    split[graph.test_mask] = "test"
    (d / "split.txt").write_text("".join(f"{x}\n" for x in split))


def _lines(path: Path) -> list:
    if not path.exists():
        raise FileNotFoundError(f"missing dataset file {path}")
    return [ln for ln in path.read_text().splitlines() if ln.strip()]


def load_dataset(directory) -> Graph:
    d = Path(directory)
    labels_raw = _lines(d / "labels.txt")
    try:
        labels = np.array([int(x) for x in labels_raw], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{d / 'labels.txt'}: non-integer label") from exc
    n = len(labels)

    feat_lines = _lines(d / "features.csv")
    if len(feat_lines) != n:
        raise ValueError(f"features.csv has {len(feat_lines)} rows, labels.txt has {n}")
    try:
        features = np.array([[float(x) for x in ln.split(",")] for ln in feat_lines])
    except ValueError as exc:
        raise ValueError(f"{d / 'features.csv'}: malformed row") from exc
    if features.ndim != 2:
        raise ValueError(f"{d / 'features.csv'}: ragged rows")

    edges = []
    for k, ln in enumerate(_lines(d / "edges.tsv")):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"edges.tsv line {k + 1}: expected two ids")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ValueError(f"edges.tsv line {k + 1}: non-integer id") from exc

    split = [x.strip() for x in _lines(d / "split.txt")]
    if len(split) != n:
        raise ValueError(f"split.txt has {len(split)} rows, labels.txt has {n}")
    bad = set(split) - {"train", "val", "test", "none"}
    if bad:
        raise ValueError(f"split.txt: unknown split names {sorted(bad)}")
    split = np.array(split)
    return build_graph(edges, n, features, labels,
                       split == "train", split == "val", split == "test")
