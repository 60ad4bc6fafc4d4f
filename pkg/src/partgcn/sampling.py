"""Per-epoch boundary sampling, plus the edge-sampling ablations.

All draws go through :class:`~partgcn.keyed.KeyedUniform`, so any worker can
recompute another worker's selection from ``(seed, epoch, partition, node)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import keyed
from .graph import Graph
from .plan import PartitionPlan


@dataclass(frozen=True, eq=False)
class EpochSamplePlan:
    """Selected boundary sets ``U_i`` and send lists ``S[(i, j)] = U_j ∩ V_i``.

    ``edge_keep`` is only set by the edge samplers: a mask over the full
    graph's CSR entries telling which edges survive this epoch.
    """

    epoch: int
    rate: float
    selected: tuple
    send: dict
    edge_keep: np.ndarray | None = field(default=None)

    @property
    def rows_received(self) -> int:
        return int(sum(len(u) for u in self.selected))


def _check_rate(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {p}")


def boundary_uniforms(seed: int, epoch, part: int, nodes) -> np.ndarray:
    return keyed.KeyedUniform(seed, keyed.BOUNDARY, epoch, part).draw(nodes)


def select_boundary(boundary_ids, p: float, epoch: int, seed: int, part: int) -> np.ndarray:
    """Mask over ``boundary_ids``: each kept independently with probability ``p``."""
    _check_rate(p)
    return boundary_uniforms(seed, epoch, part, boundary_ids) < p


def send_lists(part_of, selected) -> dict:
    """``S[(i, j)] = U_j ∩ V_i`` for every nonempty pair."""
    send = {}
    for j, u in enumerate(selected):
        owners = part_of[u]
        for i in np.unique(owners):
            send[(int(i), j)] = u[owners == i]
    return send


def sample_boundary(plan: PartitionPlan, p: float, epoch: int, seed: int) -> EpochSamplePlan:
    _check_rate(p)
    selected = tuple(b[select_boundary(b, p, epoch, seed, i)]
                     for i, b in enumerate(plan.boundary))
    return EpochSamplePlan(epoch, p, selected, send_lists(plan.part_of, selected))


def edge_keep(u, v, q: float, epoch: int, seed: int, stream: int = keyed.BOUNDARY_EDGE) -> np.ndarray:
    """Keep decision per undirected edge; symmetric in ``(u, v)``."""
    return keyed.KeyedUniform(seed, stream, epoch).pairs(u, v) < q


def _selected_from_keep(graph: Graph, plan: PartitionPlan, keep) -> tuple:
    src = graph.row_ids()
    po = plan.part_of
    live = keep & (po[src] != po[graph.indices])
    out = []
    for i in range(plan.num_parts):
        sel = live & (po[src] == i)
        out.append(np.unique(graph.indices[sel]))
    return tuple(out)


def sample_boundary_edges(graph: Graph, plan: PartitionPlan, q: float, epoch: int,
                          seed: int) -> EpochSamplePlan:
    """Boundary edge sampling: only cross-partition edges are dropped.

    A boundary node is communicated iff at least one of its edges into the
    receiving partition survives.
    """
    _check_rate(p=q)
    src = graph.row_ids()
    cross = plan.part_of[src] != plan.part_of[graph.indices]
    keep = np.ones(len(src), dtype=bool)
    keep[cross] = edge_keep(src[cross], graph.indices[cross], q, epoch, seed)
    selected = _selected_from_keep(graph, plan, keep)
    return EpochSamplePlan(epoch, q, selected, send_lists(plan.part_of, selected), keep)


@dataclass(frozen=True, eq=False)
class DroppedEdges:
    """A view of ``graph`` with some undirected edges removed for one epoch."""

    graph: Graph
    keep: np.ndarray
    rate: float

    def edges(self) -> np.ndarray:
        src = self.graph.row_ids()
        sel = self.keep & (src < self.graph.indices)
        return np.stack([src[sel], self.graph.indices[sel]], axis=1)

    def comm_plan(self, plan: PartitionPlan, epoch: int) -> EpochSamplePlan:
        selected = _selected_from_keep(self.graph, plan, self.keep)
        return EpochSamplePlan(epoch, self.rate, selected,
                               send_lists(plan.part_of, selected), self.keep)


def drop_edge_global(graph: Graph, q: float, epoch: int, seed: int) -> DroppedEdges:
    """DropEdge over the whole graph: every edge kept with probability ``q``."""
    _check_rate(q)
    src = graph.row_ids()
    keep = edge_keep(src, graph.indices, q, epoch, seed, keyed.DROP_EDGE)
    return DroppedEdges(graph, keep, q)


def matched_edge_rates(graph: Graph, plan: PartitionPlan, p: float):
    """Edge keep rates dropping as many edges, in expectation, as node sampling at ``p``.

    Node sampling drops each directed cross edge with probability ``1 - p``, so
    boundary edge sampling matches at ``q = p``. DropEdge spreads the same
    count over all edges: ``q = 1 - (1 - p) * E_cross / E``.
    """
    _check_rate(p)
    e = graph.edges()
    if len(e) == 0:
        return p, 1.0
    n_cross = int((plan.part_of[e[:, 0]] != plan.part_of[e[:, 1]]).sum())
    return p, 1.0 - (1.0 - p) * n_cross / len(e)
