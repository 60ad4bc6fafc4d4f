"""Hand-differentiated building blocks.

The GraphSAGE mean layer computes, for every inner node ``v``::

    z_v = (sum_{u in N(v) ∩ inner} h_u + (1/p) sum_{u in N(v) ∩ halo} h_u) / |N(v)|
    h'_v = relu(concat(z_v, h_v) @ W + b)

where ``|N(v)|`` is the full-graph degree, so the sampled halo gives an
unbiased estimate of the full mean.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, SubgraphWithHalo
from .keyed import KeyedUniform


def aggregation_matrix(sub: SubgraphWithHalo, p: float = 1.0) -> sp.csr_matrix:
    """Sparse ``(n_inner, n_inner + n_halo)`` operator computing ``z`` from the stacked rows."""
    n_in = sub.num_inner
    if sub.num_halo and p <= 0:
        raise ValueError("p must be > 0 when the halo is nonempty")
    deg = np.repeat(sub.inner_degree, np.diff(sub.indptr)).astype(np.float64)
    data = sub.edge_weight / np.maximum(deg, 1.0)
    if sub.num_halo:
        data = np.where(sub.indices >= n_in, data / p, data)
    return sp.csr_matrix((data, sub.indices, sub.indptr), shape=(n_in, n_in + sub.num_halo))


def dropout(h: np.ndarray, rate: float, train: bool, rng=None, row_ids=None):
    """Inverted dropout. Returns ``(h', scale)`` with ``scale`` None when inactive.

    ``rng`` is either a ``numpy.random.Generator`` or a :class:`KeyedUniform`;
    the latter needs ``row_ids`` and makes the mask a function of the row ids,
    so every worker agrees on the mask of a shared node.
    """
    if not train or rate == 0.0:
        return h, None
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    if isinstance(rng, KeyedUniform):
        u = rng.rows(row_ids, h.shape[1])
    else:
        u = rng.random(h.shape)
    scale = (u >= rate).astype(h.dtype) / h.dtype.type(1.0 - rate)
    return h * scale, scale


@dataclass
class SageCache:
    agg: sp.csr_matrix
    h_in: np.ndarray
    drop_scale: np.ndarray | None
    z: np.ndarray
    pre: np.ndarray
    w: np.ndarray
    activation: bool


def sage_forward(sub: SubgraphWithHalo, h_stack: np.ndarray, w: np.ndarray, b=None,
                 p: float = 1.0, activation: bool = True, train: bool = False,
                 dropout_rate: float = 0.0, rng=None):
    """One GraphSAGE-mean layer over a partition's stacked ``[inner; halo]`` rows.

    Dropout (when ``train``) is applied to the stacked input rows before
    aggregation; pass a :class:`KeyedUniform` as ``rng`` to key the mask on
    global node ids. Returns ``(out, cache)``.
    """
    n_rows = sub.num_inner + sub.num_halo
    if h_stack.shape[0] != n_rows:
        raise ValueError(f"expected {n_rows} stacked rows, got {h_stack.shape[0]}")
    d_in = h_stack.shape[1]
    if w.shape[0] != 2 * d_in:
        raise ValueError(f"weight has {w.shape[0]} rows, expected {2 * d_in}")
    h_in, scale = dropout(h_stack, dropout_rate, train, rng, sub.stack_ids)
    agg = aggregation_matrix(sub, p)
    z = np.asarray(agg @ h_in, dtype=h_stack.dtype)
    pre = np.concatenate([z, h_in[:sub.num_inner]], axis=1) @ w
    if b is not None:
        pre = pre + b
    out = np.maximum(pre, 0) if activation else pre
    return out, SageCache(agg, h_in, scale, z, pre, w, activation)


def sage_backward(cache: SageCache, g_out: np.ndarray):
    """Gradients ``(g_w, g_b, g_stack)``; ``g_stack`` covers inner and halo rows."""
    if g_out.shape != cache.pre.shape:
        raise ValueError(f"upstream gradient shape {g_out.shape} != {cache.pre.shape}")
    g_pre = g_out * (cache.pre > 0) if cache.activation else g_out
    n_in, d = cache.z.shape
    cat = np.concatenate([cache.z, cache.h_in[:n_in]], axis=1)
    g_w = cat.T @ g_pre
    g_b = g_pre.sum(axis=0)
    g_cat = g_pre @ cache.w.T
    g_stack = np.asarray(cache.agg.T @ g_cat[:, :d], dtype=g_out.dtype)
    g_stack[:n_in] += g_cat[:, d:]
    if cache.drop_scale is not None:
        g_stack *= cache.drop_scale
    return g_w, g_b, g_stack


def propagation_matrix(graph: Graph) -> sp.csr_matrix:
    """``D^{-1/2} (A + I) D^{-1/2}`` with ``D`` the degree of ``A + I``."""
    n = graph.num_nodes
    a = sp.csr_matrix((np.ones(len(graph.indices)), graph.indices, graph.indptr), shape=(n, n))
    a = a + sp.identity(n, format="csr")
    dinv = 1.0 / np.sqrt(np.asarray(a.sum(axis=1)).ravel())
    return sp.csr_matrix(sp.diags(dinv) @ a @ sp.diags(dinv))


def gcn_propagate(p_rows, h_stack: np.ndarray, w: np.ndarray, s_diag) -> np.ndarray:
    """``p_rows @ diag(s) @ h_stack @ w``.

    ``p_rows`` is P restricted to a partition's inner rows, with columns
    ordered ``[inner; boundary]``; ``s_diag`` is 1 on inner columns, ``1/p`` on
    kept boundary columns and 0 on dropped ones.
    """
    s_diag = np.asarray(s_diag, dtype=np.float64)
    if p_rows.shape[1] != h_stack.shape[0] or len(s_diag) != h_stack.shape[0]:
        raise ValueError("dimension mismatch")
    if h_stack.shape[1] != w.shape[0]:
        raise ValueError("dimension mismatch")
    return np.asarray(p_rows @ ((s_diag[:, None] * h_stack) @ w))


def softmax_xent(logits: np.ndarray, labels, mask, normalizer: float | None = None):
    """Cross-entropy summed over masked rows and divided by ``normalizer``.

    ``normalizer`` defaults to the number of masked rows (mean loss).
    """
    mask = np.asarray(mask, dtype=bool)
    grad = np.zeros_like(logits)
    count = int(mask.sum())
    if count == 0:
        warnings.warn("softmax_xent called with an empty mask", RuntimeWarning, stacklevel=2)
        return 0.0, grad
    norm = float(count if normalizer is None else normalizer)
    x = logits[mask]
    y = np.asarray(labels)[mask]
    if y.max() >= logits.shape[1] or y.min() < 0:
        raise ValueError("label out of range")
    x = x - x.max(axis=1, keepdims=True)
    logz = np.log(np.exp(x).sum(axis=1))
    rows = np.arange(len(y))
    loss = float((logz - x[rows, y]).sum() / norm)
    prob = np.exp(x - logz[:, None])
    prob[rows, y] -= 1.0
    grad[mask] = prob / norm
    return loss, grad


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls([np.zeros_like(x) for x in params], [np.zeros_like(x) for x in params])


def adam_step(params, grads, state: AdamState, lr: float, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> None:
    """Bias-corrected Adam update, in place on ``params`` and ``state``."""
    if len(params) != len(grads):
        raise ValueError("params and grads differ in length")
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for x, g, m, v in zip(params, grads, state.m, state.v):
        if x.shape != g.shape:
            raise ValueError(f"shape mismatch {x.shape} vs {g.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        x -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def init_params(dims, seed: int, dtype=np.float64) -> list:
    """Glorot-uniform weights ``(2*d_in, d_out)`` and zero biases, flattened ``[W1, b1, W2, b2, ...]``."""
    rng = np.random.default_rng(seed)
    params = []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (2 * d_in + d_out))
        params.append(rng.uniform(-limit, limit, size=(2 * d_in, d_out)).astype(dtype))
        params.append(np.zeros(d_out, dtype=dtype))
    return params
