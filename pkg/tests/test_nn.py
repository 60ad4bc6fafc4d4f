import math

import numpy as np
import pytest

from helpers import halo_instance, max_rel_error, numeric_grad
from partgcn import build_graph, induced_subgraph
from partgcn.keyed import KeyedUniform
from partgcn.nn import (AdamState, adam_step, aggregation_matrix, dropout, gcn_propagate,
                        init_params, propagation_matrix, sage_backward, sage_forward, softmax_xent)

PASS_Z = np.array([[1.0], [0.0]])  # W that copies z into the output


def test_sage_p4_exact(p4):
    sub = induced_subgraph(p4, [0, 1], [2])
    out, _ = sage_forward(sub, p4.features[[0, 1, 2]], PASS_Z, activation=False)
    assert out[:, 0].tolist() == [2.0, 2.0]  # z_0 = h_1 / 1, z_1 = (h_0 + h_2) / 2


def test_sage_p4_two_outcomes_average_to_exact(p4):
    kept = induced_subgraph(p4, [0, 1], [2])
    dropped = induced_subgraph(p4, [0, 1], [])
    z_kept = sage_forward(kept, p4.features[[0, 1, 2]], PASS_Z, p=0.5, activation=False)[0][1, 0]
    z_drop = sage_forward(dropped, p4.features[[0, 1]], PASS_Z, p=0.5, activation=False)[0][1, 0]
    assert z_kept == 3.5
    assert z_drop == 0.5
    assert (z_kept + z_drop) / 2 == 2.0


def test_isolated_node():
    g = build_graph([(1, 2)], 3, features=[[5.0], [1.0], [1.0]])
    sub = induced_subgraph(g, [0, 1, 2], [])
    w = np.array([[2.0], [3.0]])
    out, cache = sage_forward(sub, g.features, w)
    assert cache.z[0, 0] == 0.0
    assert out[0, 0] == 15.0


def test_sage_rejects_bad_inputs(p4):
    sub = induced_subgraph(p4, [0, 1], [2])
    with pytest.raises(ValueError):
        sage_forward(sub, p4.features[[0, 1]], PASS_Z)
    with pytest.raises(ValueError):
        sage_forward(sub, p4.features[[0, 1, 2]], np.ones((3, 1)))
    with pytest.raises(ValueError):
        aggregation_matrix(sub, 0.0)
    _, cache = sage_forward(sub, p4.features[[0, 1, 2]], PASS_Z)
    with pytest.raises(ValueError):
        sage_backward(cache, np.ones((3, 1)))


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("p", [1.0, 0.5])
@pytest.mark.parametrize("rate", [0.0, 0.3])
def test_sage_gradients_finite_difference(seed, p, rate):
    _, sub, h, w, b, rng = halo_instance(seed)
    g_out = rng.normal(size=(sub.num_inner, w.shape[1]))
    key = KeyedUniform(seed, 99)

    def loss():
        out, _ = sage_forward(sub, h, w, b, p, train=True, dropout_rate=rate, rng=key)
        return float((out * g_out).sum())

    _, cache = sage_forward(sub, h, w, b, p, train=True, dropout_rate=rate, rng=key)
    g_w, g_b, g_h = sage_backward(cache, g_out)
    assert sub.num_halo > 0
    assert max_rel_error(g_w, numeric_grad(loss, w)) < 1e-4
    assert max_rel_error(g_b, numeric_grad(loss, b)) < 1e-4
    assert max_rel_error(g_h, numeric_grad(loss, h)) < 1e-4


def test_zero_upstream_gives_zero_gradients():
    _, sub, h, w, b, _ = halo_instance(4)
    out, cache = sage_forward(sub, h, w, b, 0.5)
    g_w, g_b, g_h = sage_backward(cache, np.zeros_like(out))
    assert not g_w.any() and not g_b.any() and not g_h.any()


def test_halo_gradient_scales_with_inverse_p():
    _, sub, h, w, b, rng = halo_instance(5)
    g_out = rng.normal(size=(sub.num_inner, w.shape[1]))
    halo = slice(sub.num_inner, None)
    _, c1 = sage_forward(sub, h, w, b, 0.25, activation=False)
    _, c2 = sage_forward(sub, h, w, b, 0.5, activation=False)
    g1 = sage_backward(c1, g_out)[2][halo]
    g2 = sage_backward(c2, g_out)[2][halo]
    assert np.allclose(g2, g1 / 2, rtol=1e-12, atol=0)


def test_propagation_matrix_p4(p4):
    P = propagation_matrix(p4).toarray()
    assert np.allclose(P, P.T)
    assert math.isclose(P[0, 1], 1 / math.sqrt(6), rel_tol=1e-15)
    assert math.isclose(P[0, 0], 0.5, rel_tol=1e-15)
    d = np.array([2, 3, 3, 2])
    a = np.eye(4) + np.eye(4, k=1) + np.eye(4, k=-1)
    assert np.allclose(P, a / np.sqrt(np.outer(d, d)), rtol=1e-15)


def test_gcn_propagate_identity_and_single_node():
    g = build_graph([], 1, features=[[2.0, -1.0]])
    P = propagation_matrix(g)
    w = np.array([[1.0], [3.0]])
    assert gcn_propagate(P, g.features, w, [1.0]).tolist() == [[-1.0]]
    with pytest.raises(ValueError):
        gcn_propagate(P, g.features, np.ones((3, 1)), [1.0])


def test_gcn_full_selection_is_exact(p4):
    P = propagation_matrix(p4)
    w = np.array([[1.0]])
    rows = P[[0, 1]][:, [0, 1, 2]]
    z = gcn_propagate(rows, p4.features[[0, 1, 2]], w, np.ones(3))
    assert np.array_equal(z, (P @ p4.features)[[0, 1]])


def test_softmax_uniform_logits():
    loss, grad = softmax_xent(np.zeros((5, 4)), [0, 1, 2, 3, 0], np.ones(5, bool))
    assert math.isclose(loss, math.log(4), rel_tol=1e-15)
    assert np.allclose(grad.sum(axis=1), 0)


def test_softmax_confident_correct():
    logits = np.array([[60.0, 0.0, 0.0]])
    loss, _ = softmax_xent(logits, [0], [True])
    assert loss < 1e-25


def test_softmax_gradient_finite_difference():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(12, 4))
    labels = rng.integers(0, 4, 12)
    mask = rng.random(12) < 0.6
    _, grad = softmax_xent(logits, labels, mask, normalizer=7.0)
    num = numeric_grad(lambda: softmax_xent(logits, labels, mask, normalizer=7.0)[0], logits)
    assert not grad[~mask].any()
    assert max_rel_error(grad, num, floor=1e-8) < 1e-6


def test_softmax_empty_mask_warns():
    with pytest.warns(RuntimeWarning):
        loss, grad = softmax_xent(np.ones((3, 2)), [0, 1, 0], np.zeros(3, bool))
    assert loss == 0.0 and not grad.any()


def test_softmax_label_range():
    with pytest.raises(ValueError):
        softmax_xent(np.zeros((2, 2)), [0, 2], [True, True])


def test_adam_first_step_magnitude():
    x = [np.array([1.0, -2.0, 3.0])]
    adam_step(x, [np.array([0.3, -5.0, 1e-3])], AdamState.zeros_like(x), lr=0.01)
    assert np.allclose(x[0], [0.99, -1.99, 2.99], atol=1e-7)


def test_adam_zero_gradient_noop():
    x = [np.array([1.0, 2.0])]
    state = AdamState.zeros_like(x)
    for _ in range(3):
        adam_step(x, [np.zeros(2)], state, lr=0.1)
    assert x[0].tolist() == [1.0, 2.0]


def test_adam_two_step_hand_trace():
    lr, b1, b2, eps, g = 0.1, 0.9, 0.999, 1e-8, 2.0
    theta, m, v = 1.0, 0.0, 0.0
    for t in (1, 2):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
    x = [np.array([1.0])]
    state = AdamState.zeros_like(x)
    adam_step(x, [np.array([g])], state, lr)
    adam_step(x, [np.array([g])], state, lr)
    assert state.t == 2
    assert math.isclose(x[0][0], theta, rel_tol=1e-14)
    assert math.isclose(theta, 1.0 - 2 * 0.1 * 2.0 / (2.0 + 1e-8), rel_tol=1e-12)


def test_adam_shape_mismatch():
    x = [np.zeros(2)]
    with pytest.raises(ValueError):
        adam_step(x, [np.zeros(3)], AdamState.zeros_like(x), 0.1)


def test_dropout_identities():
    h = np.arange(6.0).reshape(2, 3)
    assert dropout(h, 0.0, True)[0] is h
    assert dropout(h, 0.5, False)[0] is h
    with pytest.raises(ValueError):
        dropout(h, 1.0, True, np.random.default_rng(0))


def test_dropout_unbiased():
    h = np.random.default_rng(1).normal(size=(4, 3))
    rng = np.random.default_rng(2)
    draws = np.stack([dropout(h, 0.4, True, rng)[0] for _ in range(10_000)])
    se = draws.std(axis=0, ddof=1) / np.sqrt(len(draws))
    assert (np.abs(draws.mean(axis=0) - h) <= 3 * se + 1e-12).all()


def test_dropout_keyed_mask_follows_node_ids():
    key = KeyedUniform(0, 2, 0, 0)
    h = np.ones((3, 4))
    a, _ = dropout(h, 0.5, True, key, row_ids=np.array([7, 3, 9]))
    b, _ = dropout(h[:2], 0.5, True, key, row_ids=np.array([9, 7]))
    assert np.array_equal(a[[2, 0]], b)


def test_init_params_shapes():
    params = init_params([5, 4, 3], seed=0)
    assert [p.shape for p in params] == [(10, 4), (4,), (8, 3), (3,)]
    assert not params[1].any()
    again = init_params([5, 4, 3], seed=0, dtype=np.float32)
    assert again[0].dtype == np.float32
    assert np.allclose(again[0], params[0], rtol=1e-6)
