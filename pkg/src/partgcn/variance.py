"""Estimation error of sampled propagation and its closed-form upper bound.

For one linear propagation step ``Z = P H W`` restricted to a partition's inner
rows, sampling the boundary with rate ``p`` and rescaling kept rows by ``1/p``
gives an unbiased ``Z~``. Its squared error satisfies::

    E ||Z~_V - Z_V||_F^2 = (1-p)/p * sum_{v in V, u in B} P_vu^2 ||(HW)_u||^2
                        <= gamma^2 ||P_{V,B}||_F^2 / p

with ``gamma`` the largest row norm of ``HW``. This module measures the left
side by Monte Carlo (and, for small boundaries, by exhaustive enumeration)
and reports both sides.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .graph import Graph, HaloTemplate
from .nn import aggregation_matrix, gcn_propagate, propagation_matrix
from .plan import PartitionPlan
from .sampling import boundary_uniforms

MAX_ENUMERATED_BOUNDARY = 12


class VarianceBoundViolation(AssertionError):
    pass


@dataclass
class VarianceReport:
    p: float
    trials: int
    gamma: float
    empirical: np.ndarray      # per partition, Monte Carlo E||Z~ - Z||_F^2
    empirical_se: np.ndarray   # standard error of the above
    exact: np.ndarray          # closed form (1-p)/p * sum P^2 ||HW_u||^2
    enumerated: list           # exhaustive expectation, None where |B_i| is too large
    bound: np.ndarray          # gamma^2 ||P_{V_i,B_i}||_F^2 / p
    num_nodes: int

    @property
    def empirical_global(self) -> float:
        """Per-node average error over the whole graph."""
        return float(self.empirical.sum() / self.num_nodes)

    @property
    def bound_global(self) -> float:
        return float(self.bound.sum() / self.num_nodes)

    @property
    def slack(self) -> float:
        return 1.0 + 3.0 / np.sqrt(self.trials)

    def within_bound(self) -> bool:
        return bool((self.empirical <= self.bound * self.slack).all())


@dataclass
class _PartitionOperator:
    inner: np.ndarray
    boundary: np.ndarray
    p_rows: object  # P[V_i, V_i ∪ B_i], columns inner then boundary

    @property
    def p_boundary(self):
        return self.p_rows[:, len(self.inner):]


def _operators(graph: Graph, plan: PartitionPlan, P=None):
    P = propagation_matrix(graph) if P is None else P
    ops = []
    for v, b in zip(plan.inner, plan.boundary):
        cols = np.concatenate([v, b])
        ops.append(_PartitionOperator(v, b, P[v][:, cols].tocsr()))
    return P, ops


def _s_diag(n_in: int, keep: np.ndarray, p: float) -> np.ndarray:
    return np.concatenate([np.ones(n_in), np.where(keep, 1.0 / p, 0.0)])


def _stack(h: np.ndarray, op: _PartitionOperator) -> np.ndarray:
    return np.concatenate([h[op.inner], h[op.boundary]])


def exact_error(op: _PartitionOperator, hw: np.ndarray, p: float) -> float:
    pb = op.p_boundary.tocoo()
    row_sq = (hw[op.boundary] ** 2).sum(axis=1)
    return float((1.0 - p) / p * (pb.data ** 2 * row_sq[pb.col]).sum())


def enumerate_error(op: _PartitionOperator, h: np.ndarray, w: np.ndarray, p: float) -> float:
    """Expected squared error by summing over all ``2^|B|`` selections."""
    nb = len(op.boundary)
    if nb > MAX_ENUMERATED_BOUNDARY:
        raise ValueError(f"boundary of {nb} nodes is too large to enumerate")
    stack = _stack(h, op)
    z = gcn_propagate(op.p_rows, stack, w, np.ones(len(stack)))
    total = 0.0
    for bits in itertools.product((False, True), repeat=nb):
        keep = np.array(bits, dtype=bool)
        k = int(keep.sum())
        prob = p ** k * (1.0 - p) ** (nb - k)
        if prob == 0.0:
            continue
        zt = gcn_propagate(op.p_rows, stack, w, _s_diag(len(op.inner), keep, p))
        total += prob * float(((zt - z) ** 2).sum())
    return total


def estimate_variance(graph: Graph, plan: PartitionPlan, h, w, p: float, trials: int,
                      seed: int = 0, check: bool = True, enumerate_small: bool = True) -> VarianceReport:
    """Monte Carlo squared error of boundary-sampled propagation, per partition.

    Trial ``t`` uses the sampler's selection for epoch ``t``, so sweeps over
    ``p`` with the same seed are coupled (nested selections).
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]; the 1/p estimator is undefined at p = 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    h = np.asarray(h, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    _, ops = _operators(graph, plan)
    hw = h @ w
    gamma = float(np.sqrt((hw ** 2).sum(axis=1)).max()) if len(hw) else 0.0
    emp, se, exact, enum, bound = [], [], [], [], []
    for i, op in enumerate(ops):
        stack = _stack(h, op)
        z = gcn_propagate(op.p_rows, stack, w, np.ones(len(stack)))
        errs = np.empty(trials)
        for t in range(trials):
            keep = boundary_uniforms(seed, t, i, op.boundary) < p
            zt = gcn_propagate(op.p_rows, stack, w, _s_diag(len(op.inner), keep, p))
            errs[t] = ((zt - z) ** 2).sum()
        emp.append(errs.mean())
        se.append(errs.std(ddof=1) / np.sqrt(trials) if trials > 1 else 0.0)
        exact.append(exact_error(op, hw, p))
        small = enumerate_small and len(op.boundary) <= MAX_ENUMERATED_BOUNDARY
        enum.append(enumerate_error(op, h, w, p) if small else None)
        bound.append(gamma ** 2 * float((op.p_boundary.data ** 2).sum()) / p)
    report = VarianceReport(p, trials, gamma, np.array(emp), np.array(se), np.array(exact),
                            enum, np.array(bound), graph.num_nodes)
    if check and not report.within_bound():
        raise VarianceBoundViolation(
            f"empirical error {report.empirical} exceeds bound {report.bound} at p={p}")
    return report


def loose_global_bound(graph: Graph, h, w, p: float) -> float:
    """``gamma^2 ||P||_F^2 / (p |V|)``, the partition-free form of the bound."""
    P = propagation_matrix(graph)
    hw = np.asarray(h) @ np.asarray(w)
    gamma = float(np.sqrt((hw ** 2).sum(axis=1)).max())
    return gamma ** 2 * float((P.data ** 2).sum()) / (p * graph.num_nodes)


def variance_sweep(graph: Graph, plan: PartitionPlan, h, w, p_list, trials: int, seed: int = 0) -> list:
    rows = []
    for p in p_list:
        r = estimate_variance(graph, plan, h, w, p, trials, seed, check=False, enumerate_small=False)
        rows.append({
            "p": p,
            "empirical": r.empirical_global,
            "bound": r.bound_global,
            "gamma": r.gamma,
            "exact": float(r.exact.sum() / r.num_nodes),
            "bound_loose": loose_global_bound(graph, h, w, p),
        })
    return rows


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def sampled_mean_stats(graph: Graph, plan: PartitionPlan, h, p: float, trials: int, seed: int = 0,
                       kind: str = "sage", w=None):
    """Monte Carlo mean and standard error of a sampled aggregation, against its exact value.

    ``kind="sage"`` checks the GraphSAGE mean aggregate ``z~``; ``kind="gcn"``
    checks ``Z~ = P S H W``. Returns ``(exact, mean, se)`` stacked over all
    partitions' inner rows (partition order).
    """
    h = np.asarray(h, dtype=np.float64)
    exact_all, mean_all, se_all = [], [], []
    if kind == "gcn":
        _, ops = _operators(graph, plan)
    for i in range(plan.num_parts):
        if kind == "sage":
            tmpl = HaloTemplate.build(graph, plan.inner[i], i)
            full = tmpl.restrict(np.ones(len(tmpl.boundary_ids), dtype=bool))
            stack = np.concatenate([h[tmpl.inner_ids], h[tmpl.boundary_ids]])
            exact = aggregation_matrix(full, 1.0) @ stack
        else:
            op = ops[i]
            stack = _stack(h, op)
            exact = gcn_propagate(op.p_rows, stack, w, np.ones(len(stack)))
        mean = np.zeros_like(exact)
        m2 = np.zeros_like(exact)  # Welford running sum of squared deviations
        boundary = tmpl.boundary_ids if kind == "sage" else ops[i].boundary
        for t in range(trials):
            keep = boundary_uniforms(seed, t, i, boundary) < p
            if kind == "sage":
                sub = tmpl.restrict(keep)
                z = aggregation_matrix(sub, p) @ np.concatenate([stack[:tmpl.num_inner],
                                                                 stack[tmpl.num_inner:][keep]])
            else:
                z = gcn_propagate(ops[i].p_rows, stack, w, _s_diag(len(ops[i].inner), keep, p))
            delta = z - mean
            mean += delta / (t + 1)
            m2 += delta * (z - mean)
        var = m2 / max(trials - 1, 1)
        exact_all.append(exact)
        mean_all.append(mean)
        se_all.append(np.sqrt(var / trials))
    return np.concatenate(exact_all), np.concatenate(mean_all), np.concatenate(se_all)
