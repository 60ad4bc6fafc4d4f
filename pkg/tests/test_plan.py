import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_graph
from partgcn import Assignment, boundary_inner_ratios, build_plan, comm_volume, memory_estimate
from partgcn.plan import comm_volume_edgewise, cross_edge_counts, layer_memory


def test_p4_plan(p4_plan):
    assert [b.tolist() for b in p4_plan.boundary] == [[2], [1]]
    assert p4_plan.demand_set(1, 0).tolist() == [2]
    assert p4_plan.demand_set(0, 1).tolist() == [1]
    assert comm_volume(p4_plan)[0] == 2


def test_single_partition_has_no_boundary(small_sbm):
    plan = build_plan(small_sbm, Assignment(np.zeros(small_sbm.num_nodes, dtype=int), 1))
    assert len(plan.boundary[0]) == 0
    assert comm_volume(plan)[0] == 0
    assert boundary_inner_ratios(plan)["ratios"].tolist() == [0.0]


def test_star_plan(star):
    g, plan = star
    assert plan.boundary[0].tolist() == [1, 2, 3, 4, 5]
    assert plan.boundary[1].tolist() == [0]
    total, send = comm_volume(plan)
    assert total == 6
    assert send.tolist() == [1, 5]
    # five cross edges land on one boundary node of partition 1
    assert [c.tolist() for c in cross_edge_counts(g, plan)] == [[1, 1, 1, 1, 1], [5]]


def test_memory_examples(p4_plan):
    est = memory_estimate(p4_plan, [4])
    assert est["per_partition_per_layer"][0, 0] == (3 * 2 + 1) * 4 == 28
    assert layer_memory(15000, 86000, 256) == 33_536_000
    assert layer_memory(7, 0, 1) == 21


def test_memory_sampled_projection(p4_plan):
    est = memory_estimate(p4_plan, [4, 2], p=0.5)
    assert est["per_partition_per_layer"].tolist() == [[26.0, 13.0], [26.0, 13.0]]
    with pytest.raises(ValueError):
        memory_estimate(p4_plan, [0])


def test_ratios_p4(p4_plan):
    r = boundary_inner_ratios(p4_plan)
    assert r["ratios"].tolist() == [0.5, 0.5]
    assert r["max"] == r["min"] == r["median"] == 0.5


def plan_instances():
    return st.tuples(st.integers(0, 2**31), st.integers(2, 30), st.integers(1, 6),
                     st.floats(0.02, 0.5))


def _instance(seed, n, m, density):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, density)
    m = min(m, n)
    part_of = np.concatenate([np.arange(m), rng.integers(0, m, n - m)])
    rng.shuffle(part_of)
    return g, Assignment(part_of, m), rng


@settings(max_examples=100, deadline=None)
@given(plan_instances())
def test_plan_invariants_and_volume_identity(inst):
    g, a, _ = _instance(*inst)
    plan = build_plan(g, a)
    for i in range(plan.num_parts):
        b = plan.boundary[i]
        assert not np.isin(b, plan.inner[i]).any()
        for u in b:
            assert (a.part_of[g.neighbors(u)] == i).any()
        parts = [plan.demand_set(j, i) for j in range(plan.num_parts)]
        joined = np.concatenate(parts)
        assert len(joined) == len(np.unique(joined))
        assert np.array_equal(np.sort(joined), b)
    total, send = comm_volume(plan)
    assert total == comm_volume_edgewise(g, a.part_of)
    assert send.sum() == total


@settings(max_examples=60, deadline=None)
@given(plan_instances())
def test_refinement_never_decreases_boundary(inst):
    g, a, rng = _instance(*inst)
    sizes = a.sizes
    splittable = np.flatnonzero(sizes >= 2)
    if len(splittable) == 0:
        return
    k = int(rng.choice(splittable))
    members = a.members(k)
    moved = members[rng.permutation(len(members))[:len(members) // 2]]
    finer = a.part_of.copy()
    finer[moved] = a.num_parts
    before = comm_volume(build_plan(g, a))[0]
    after = comm_volume(build_plan(g, Assignment(finer, a.num_parts + 1)))[0]
    assert after >= before
