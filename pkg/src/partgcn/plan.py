"""Boundary sets, pairwise demand sets and the communication/memory cost models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .partition import Assignment


@dataclass(frozen=True, eq=False)
class PartitionPlan:
    """Per-partition inner sets ``V_i`` and boundary sets ``B_i``.

    ``demand[(j, i)]`` holds ``B_i ∩ V_j``: the nodes partition ``i`` must
    receive from ``j``, sorted by global id. Only nonempty pairs are stored.
    """

    num_parts: int
    part_of: np.ndarray
    inner: tuple
    boundary: tuple
    demand: dict

    def demand_set(self, src: int, dst: int) -> np.ndarray:
        return self.demand.get((src, dst), np.empty(0, dtype=np.int64))


def build_plan(graph: Graph, assignment: Assignment) -> PartitionPlan:
    if len(assignment.part_of) != graph.num_nodes:
        raise ValueError("assignment length does not match graph")
    m = assignment.num_parts
    part_of = assignment.part_of
    src = graph.row_ids()
    dst = graph.indices
    cross = part_of[src] != part_of[dst]
    # (partition needing it, boundary node) pairs, deduplicated
    pairs = np.unique(part_of[src[cross]] * graph.num_nodes + dst[cross])
    need_part, node = pairs // graph.num_nodes, pairs % graph.num_nodes
    inner = tuple(np.flatnonzero(part_of == i) for i in range(m))
    boundary = tuple(node[need_part == i] for i in range(m))
    demand = {}
    for i in range(m):
        b = boundary[i]
        owners = part_of[b]
        for j in np.unique(owners):
            demand[(int(j), i)] = b[owners == j]
    return PartitionPlan(m, part_of, inner, boundary, demand)


def comm_volume(plan: PartitionPlan):
    """Rows exchanged per propagation: ``(total, per-partition send volume)``."""
    send = np.zeros(plan.num_parts, dtype=np.int64)
    for (j, _i), nodes in plan.demand.items():
        send[j] += len(nodes)
    total = int(sum(len(b) for b in plan.boundary))
    assert total == int(send.sum())
    return total, send


def comm_volume_edgewise(graph: Graph, part_of) -> int:
    """``sum_v D(v)``, with ``D(v)`` the number of foreign partitions holding a neighbor of ``v``."""
    part_of = np.asarray(part_of)
    total = 0
    for v in range(graph.num_nodes):
        owners = {int(part_of[u]) for u in graph.neighbors(v)}
        owners.discard(int(part_of[v]))
        total += len(owners)
    return total


def memory_estimate(plan: PartitionPlan, layer_dims, p: float = 1.0) -> dict:
    """Scalars held per partition per layer: ``(3 |V_i| + p |B_i|) * d``.

    ``p`` < 1 gives the expected footprint under boundary sampling.
    """
    dims = [int(d) for d in layer_dims]
    if any(d <= 0 for d in dims):
        raise ValueError("layer dims must be positive")
    n_in = np.array([len(v) for v in plan.inner], dtype=np.float64)
    n_bd = np.array([len(b) for b in plan.boundary], dtype=np.float64)
    per_layer = np.outer(3 * n_in + p * n_bd, dims)
    if p == 1.0:
        per_layer = per_layer.astype(np.int64)
    per_part = per_layer.sum(axis=1)
    return {
        "per_partition_per_layer": per_layer,
        "per_partition": per_part,
        "total": per_part.sum(),
        "max": per_part.max(),
        "min": per_part.min(),
    }


def layer_memory(n_inner: int, n_boundary, d: int):
    return (3 * n_inner + n_boundary) * d


def boundary_inner_ratios(plan: PartitionPlan) -> dict:
    ratios = np.array([len(b) / len(v) for v, b in zip(plan.inner, plan.boundary)])
    q = np.quantile(ratios, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "ratios": ratios,
        "min": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
        "q3": float(q[3]), "max": float(q[4]),
        "straggler": int(np.argmax(ratios)),
    }


def cross_edge_counts(graph: Graph, plan: PartitionPlan):
    """Per partition, the number of edges from each boundary node into ``V_i``."""
    src = graph.row_ids()
    out = []
    for i in range(plan.num_parts):
        sel = (plan.part_of[src] == i) & (plan.part_of[graph.indices] != i)
        nodes, counts = np.unique(graph.indices[sel], return_counts=True)
        assert np.array_equal(nodes, plan.boundary[i])
        out.append(counts)
    return out


def cut_edges(graph: Graph, part_of) -> int:
    e = graph.edges()
    part_of = np.asarray(part_of)
    return int((part_of[e[:, 0]] != part_of[e[:, 1]]).sum())
