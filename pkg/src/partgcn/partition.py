"""Node-to-partition assignment: random, streaming greedy, or imported from a file."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph


@dataclass(frozen=True, eq=False)
class Assignment:
    part_of: np.ndarray
    num_parts: int

    def __post_init__(self):
        part_of = np.asarray(self.part_of, dtype=np.int64)
        object.__setattr__(self, "part_of", part_of)
        if self.num_parts < 1:
            raise ValueError("num_parts must be >= 1")
        if len(part_of) and (part_of.min() < 0 or part_of.max() >= self.num_parts):
            raise ValueError("partition id out of range")
        if (np.bincount(part_of, minlength=self.num_parts) == 0).any():
            raise ValueError("every partition must be nonempty")

    def __eq__(self, other):
        return (isinstance(other, Assignment) and self.num_parts == other.num_parts
                and np.array_equal(self.part_of, other.part_of))

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.part_of, minlength=self.num_parts)

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.part_of == i)


def _check_parts(graph: Graph, m: int):
    if not 1 <= m <= graph.num_nodes:
        raise ValueError(f"number of parts must be in [1, {graph.num_nodes}], got {m}")


def partition_random(graph: Graph, m: int, seed: int = 0) -> Assignment:
    """Balanced random assignment (sizes differ by at most one)."""
    _check_parts(graph, m)
    perm = np.random.default_rng(seed).permutation(graph.num_nodes)
    part_of = np.empty(graph.num_nodes, dtype=np.int64)
    part_of[perm] = np.arange(graph.num_nodes) % m
    return Assignment(part_of, m)


def partition_greedy(graph: Graph, m: int, slack: float = 0.0, seed: int = 0,
                     penalty: float = 1.0) -> Assignment:
    """Streaming greedy partitioner aimed at few boundary nodes.

    Nodes are visited in BFS order. Each one joins the partition maximizing
    ``placed_neighbors_in_part - penalty * size / capacity`` among partitions
    with room, lowest id on ties. Capacity is ``ceil((1 + slack) * n / m)``;
    with ``slack == 0`` sizes are additionally held to ``n // m`` or
    ``n // m + 1``. BFS roots are drawn at random among the minimum-degree
    unvisited nodes, so a traversal starts from the periphery of a component.
    """
    _check_parts(graph, m)
    if slack < 0:
        raise ValueError("slack must be >= 0")
    n = graph.num_nodes
    cap = math.ceil((1 + slack) * n / m)
    if cap * m < n:
        raise ValueError("infeasible capacity")
    base, extra = divmod(n, m)
    strict = slack == 0
    rng = np.random.default_rng(seed)
    deg = graph.degrees

    part_of = np.full(n, -1, dtype=np.int64)
    sizes = np.zeros(m, dtype=np.int64)
    n_full = 0  # partitions holding base+1 nodes (strict mode)
    empty_left = m
    visited = np.zeros(n, dtype=bool)
    # roots: random order within ascending degree
    root_order = np.lexsort((rng.random(n), deg))
    root_pos = 0
    placed = 0

    def place(v):
        nonlocal n_full, empty_left, placed
        counts = np.bincount(part_of[graph.neighbors(v)] + 1, minlength=m + 1)[1:]
        score = counts - penalty * sizes / cap
        room = sizes < cap
        if strict:
            room &= (sizes < base) | ((sizes == base) & (n_full < extra))
        if empty_left >= n - placed:
            room &= sizes == 0
        score = np.where(room, score, -np.inf)
        best = int(np.argmax(score))
        part_of[v] = best
        if sizes[best] == 0:
            empty_left -= 1
        sizes[best] += 1
        if strict and sizes[best] == base + 1:
            n_full += 1
        placed += 1

    while placed < n:
        while visited[root_order[root_pos]]:
            root_pos += 1
        root = int(root_order[root_pos])
        visited[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            place(v)
            for u in graph.neighbors(v):
                if not visited[u]:
                    visited[u] = True
                    queue.append(int(u))
    return Assignment(part_of, m)


def save_assignment(assignment: Assignment, path) -> None:
    Path(path).write_text("".join(f"{int(p)}\n" for p in assignment.part_of))


def load_assignment(path, num_nodes: int) -> Assignment:
    """Read one partition id per line (e.g. converted METIS output)."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) != num_nodes:
        raise ValueError(f"{path}: expected {num_nodes} lines, got {len(lines)}")
    try:
        part_of = np.array([int(x) for x in lines], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer partition id") from exc
    if len(part_of) and part_of.min() < 0:
        raise ValueError(f"{path}: negative partition id")
    return Assignment(part_of, int(part_of.max()) + 1 if len(part_of) else 1)
