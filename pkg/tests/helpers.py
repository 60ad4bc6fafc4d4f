import numpy as np

from partgcn import build_graph


def random_graph(rng, n, density, d=3, classes=3):
    iu, ju = np.triu_indices(n, k=1)
    hit = rng.random(len(iu)) < density
    edges = np.stack([iu[hit], ju[hit]], axis=1)
    return build_graph(edges, n, rng.normal(size=(n, d)), rng.integers(0, classes, n),
                       train_mask=np.ones(n, dtype=bool))


def numeric_grad(f, x, h=1e-6):
    """Central differences of scalar ``f()`` with respect to array ``x`` (perturbed in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        fp = f()
        x[i] = old - h
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * h)
    return g


def max_rel_error(analytic, numeric, floor=1e-6):
    a, n = np.asarray(analytic), np.asarray(numeric)
    return float((np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)).max())


def halo_instance(seed, n=20, d_in=3, d_out=2, keep=0.5):
    """A 20-node random graph cut to its first half, with a random halo selection."""
    from partgcn.graph import HaloTemplate

    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.25, d=d_in)
    tmpl = HaloTemplate.build(g, np.arange(n // 2))
    mask = rng.random(len(tmpl.boundary_ids)) < keep
    mask[0] = True
    sub = tmpl.restrict(mask)
    h = np.ascontiguousarray(g.features[sub.stack_ids])
    w = rng.normal(size=(2 * d_in, d_out))
    b = rng.normal(size=d_out)
    return g, sub, h, w, b, rng
