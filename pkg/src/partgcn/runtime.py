"""Synchronous partition-parallel training over in-process workers.

Each worker owns one partition and runs the same per-epoch protocol:

1. sample its boundary set and cut its subgraph down to the sampled halo,
2. broadcast the selection so owners learn what to send,
3. per layer: ship inner rows to whoever selected them, receive the halo, compute,
4. loss on local training nodes, backward with halo gradients shipped back,
5. all-reduce the weight gradients and apply the same Adam step everywhere.

Workers only talk through :class:`Fabric` channels, which carry encoded wire
messages, so a socket transport can replace the queues without touching the
protocol.
"""

from __future__ import annotations

import hashlib
import queue
import struct
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import IntEnum

import numpy as np

from . import keyed
from .graph import Graph, HaloTemplate
from .nn import AdamState, adam_step, init_params, sage_backward, sage_forward, softmax_xent
from .plan import PartitionPlan, layer_memory
from .sampling import edge_keep, select_boundary

class ProtocolError(RuntimeError):
    """A worker saw an unexpected message or a phase timed out."""


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


class Tag(IntEnum):
    INDEX_SETS = 1
    LAYER_FEATURES = 2
    LAYER_GRADS = 3
    REDUCE_CHUNK = 4


# tag u8, epoch u32, layer u16, src u16, dst u16, rows u32
HEADER = struct.Struct("<BIHHHI")


@dataclass(frozen=True)
class Message:
    tag: Tag
    epoch: int
    layer: int
    src: int
    dst: int
    payload: np.ndarray


def encode_message(tag, epoch: int, layer: int, src: int, dst: int, rows: np.ndarray) -> bytes:
    """Header followed by the rows as little-endian row-major scalars."""
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[:, None]
    body = np.ascontiguousarray(rows, dtype=rows.dtype.newbyteorder("<")).tobytes()
    return HEADER.pack(int(tag), epoch, layer, src, dst, rows.shape[0]) + body


def decode_message(buf: bytes, dtype, ncols: int | None = None) -> Message:
    tag, epoch, layer, src, dst, nrows = HEADER.unpack_from(buf)
    flat = np.frombuffer(buf, dtype=np.dtype(dtype).newbyteorder("<"), offset=HEADER.size)
    if ncols is None:
        ncols = len(flat) // nrows if nrows else 0
    if len(flat) != nrows * ncols:
        raise ProtocolError(f"payload holds {len(flat)} scalars, header says {nrows}x{ncols}")
    return Message(Tag(tag), epoch, layer, src, dst,
                   flat.astype(np.dtype(dtype), copy=True).reshape(nrows, ncols))


class Fabric:
    """Ordered point-to-point channels plus a barrier shared by ``m`` workers."""

    def __init__(self, m: int, timeout: float = 60.0):
        self.m = m
        self.timeout = timeout
        self.channels = {(s, d): queue.SimpleQueue() for s in range(m) for d in range(m) if s != d}
        self._barrier = threading.Barrier(m, timeout=timeout)
        self.aborted = threading.Event()

    def abort(self):
        self.aborted.set()
        self._barrier.abort()

    def endpoint(self, rank: int) -> "Comm":
        return Comm(self, rank)


@dataclass
class CommCounters:
    floats_sent: int = 0
    bytes_sent: int = 0
    index_bytes_sent: int = 0
    reduce_bytes_sent: int = 0
    messages_sent: int = 0
    rows_by_layer: dict = field(default_factory=dict)

    def reset(self):
        self.__init__()


class Comm:
    """One worker's view of the fabric."""

    def __init__(self, fabric: Fabric, rank: int):
        self.fabric = fabric
        self.rank = rank
        self.counters = CommCounters()
        self.phase_log = []

    @property
    def size(self) -> int:
        return self.fabric.m

    def send(self, dst: int, tag: Tag, epoch: int, layer: int, rows: np.ndarray) -> None:
        buf = encode_message(tag, epoch, layer, self.rank, dst, rows)
        c = self.counters
        c.messages_sent += 1
        if tag in (Tag.LAYER_FEATURES, Tag.LAYER_GRADS):
            c.floats_sent += rows.size
            c.bytes_sent += len(buf)
            if tag == Tag.LAYER_FEATURES:
                c.rows_by_layer[layer] = c.rows_by_layer.get(layer, 0) + rows.shape[0]
        elif tag == Tag.INDEX_SETS:
            c.index_bytes_sent += len(buf)
            c.bytes_sent += len(buf)
        else:
            c.reduce_bytes_sent += len(buf)
        self.fabric.channels[(self.rank, dst)].put(buf)

    def recv(self, src: int, tag: Tag, epoch: int, layer: int, dtype, ncols=None) -> np.ndarray:
        chan = self.fabric.channels[(src, self.rank)]
        deadline = time.monotonic() + self.fabric.timeout
        while True:
            try:
                buf = chan.get(timeout=0.05)
                break
            except queue.Empty:
                if self.fabric.aborted.is_set():
                    raise ProtocolError(f"worker {self.rank}: fabric aborted") from None
                if time.monotonic() > deadline:
                    raise ProtocolError(
                        f"worker {self.rank}: timed out waiting for {tag.name} from {src}") from None
        msg = decode_message(buf, dtype, ncols)
        if (msg.tag, msg.epoch, msg.layer, msg.src, msg.dst) != (tag, epoch, layer, src, self.rank):
            raise ProtocolError(
                f"worker {self.rank}: expected {tag.name}(epoch={epoch}, layer={layer}) from {src}, "
                f"got {msg.tag.name}(epoch={msg.epoch}, layer={msg.layer}) from {msg.src}")
        return msg.payload

    def barrier(self, phase: str) -> None:
        self.phase_log.append(phase)
        try:
            self.fabric._barrier.wait()
        except threading.BrokenBarrierError:
            raise ProtocolError(f"worker {self.rank}: barrier broken at {phase}") from None


@dataclass(frozen=True, eq=False)
class WorkerEpochView:
    """What one worker knows after the index broadcast.

    ``send_local[j]`` are local inner indices of ``S_{i,j}``; ``recv_pos[j]``
    are positions in the halo (ascending global id) of ``U_i ∩ V_j``.
    """

    rank: int
    epoch: int
    halo_ids: np.ndarray
    send_local: dict
    recv_pos: dict


def broadcast_selection(comm: Comm, epoch: int, halo_ids, part_of, inner_ids) -> WorkerEpochView:
    """Send our selected boundary set to every peer; derive send lists from theirs."""
    halo_ids = np.asarray(halo_ids, dtype=np.int64)
    for j in range(comm.size):
        if j != comm.rank:
            comm.send(j, Tag.INDEX_SETS, epoch, 0, halo_ids.astype(np.uint32))
    send_local = {}
    for j in range(comm.size):
        if j == comm.rank:
            continue
        u_j = comm.recv(j, Tag.INDEX_SETS, epoch, 0, np.uint32, 1).ravel().astype(np.int64)
        mine = u_j[part_of[u_j] == comm.rank]
        if len(mine):
            send_local[j] = np.searchsorted(inner_ids, mine)
    owners = part_of[halo_ids]
    recv_pos = {int(j): np.flatnonzero(owners == j) for j in np.unique(owners)}
    comm.barrier(f"e{epoch}:index")
    return WorkerEpochView(comm.rank, epoch, halo_ids, send_local, recv_pos)


def exchange_features(comm: Comm, view: WorkerEpochView, layer: int, h_inner: np.ndarray) -> np.ndarray:
    """Ship ``H[S_{i,j}]`` to each ``j``; return the halo rows in halo order."""
    for j, idx in view.send_local.items():
        comm.send(j, Tag.LAYER_FEATURES, view.epoch, layer, h_inner[idx])
    halo = np.empty((len(view.halo_ids), h_inner.shape[1]), dtype=h_inner.dtype)
    for j in sorted(view.recv_pos):
        pos = view.recv_pos[j]
        rows = comm.recv(j, Tag.LAYER_FEATURES, view.epoch, layer, h_inner.dtype, h_inner.shape[1])
        if rows.shape[0] != len(pos):
            raise ProtocolError(f"worker {comm.rank}: got {rows.shape[0]} rows from {j}, expected {len(pos)}")
        halo[pos] = rows
    return halo


def exchange_gradients(comm: Comm, view: WorkerEpochView, layer: int, g_stack: np.ndarray) -> np.ndarray:
    """Return halo-row gradients to their owners; give back the inner-row gradient with remote parts added."""
    n_in = g_stack.shape[0] - len(view.halo_ids)
    g_halo = g_stack[n_in:]
    for j in sorted(view.recv_pos):
        comm.send(j, Tag.LAYER_GRADS, view.epoch, layer, g_halo[view.recv_pos[j]])
    g_inner = g_stack[:n_in].copy()
    for j in sorted(view.send_local):
        idx = view.send_local[j]
        rows = comm.recv(j, Tag.LAYER_GRADS, view.epoch, layer, g_stack.dtype, g_stack.shape[1])
        if rows.shape[0] != len(idx):
            raise ProtocolError(f"worker {comm.rank}: got {rows.shape[0]} grad rows from {j}, expected {len(idx)}")
        g_inner[idx] += rows
    return g_inner


def allreduce(comm: Comm, tensors, epoch: int = 0) -> list:
    """Arithmetic mean across workers, summed in rank order on every worker."""
    flat = np.concatenate([np.ravel(t) for t in tensors]) if tensors else np.empty(0)
    for j in range(comm.size):
        if j != comm.rank:
            comm.send(j, Tag.REDUCE_CHUNK, epoch, 0, flat[None, :])
    parts = []
    for j in range(comm.size):
        if j == comm.rank:
            parts.append(flat)
        else:
            got = comm.recv(j, Tag.REDUCE_CHUNK, epoch, 0, flat.dtype, len(flat)).ravel()
            if got.shape != flat.shape:
                raise ProtocolError("allreduce shape mismatch")
            parts.append(got)
    total = parts[0].copy()
    for x in parts[1:]:
        total += x
    total /= comm.size
    out, k = [], 0
    for t in tensors:
        t = np.asarray(t)
        out.append(total[k:k + t.size].reshape(t.shape))
        k += t.size
    comm.barrier(f"e{epoch}:reduce")
    return out


@dataclass(frozen=True)
class TrainConfig:
    num_layers: int = 2
    hidden: int = 64
    dropout: float = 0.0
    lr: float = 0.01
    epochs: int = 10
    p: float = 1.0
    seed: int = 0
    precision: str = "f64"
    eval_every: int = 1
    sampler: str = "bns"  # bns | bes | dropedge; p is the edge keep rate for the latter two
    timeout: float = 60.0

    def __post_init__(self):
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.precision not in ("f32", "f64"):
            raise ValueError("precision must be f32 or f64")
        if self.sampler not in ("bns", "bes", "dropedge"):
            raise ValueError("sampler must be bns, bes or dropedge")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def dtype(self):
        return np.float32 if self.precision == "f32" else np.float64

    def layer_dims(self, in_dim: int, num_classes: int) -> list:
        return [in_dim] + [self.hidden] * (self.num_layers - 1) + [num_classes]


@dataclass
class EpochMetrics:
    epoch: int
    loss: float
    val_acc: float | None
    test_acc: float | None
    floats_sent: int
    bytes_sent: int
    mem_est_scalars_max: int
    mem_est_scalars_min: int
    t_comp_ms: float = 0.0
    t_comm_ms: float = 0.0
    t_reduce_ms: float = 0.0
    t_sample_ms: float = 0.0
    t_epoch_ms: float = 0.0
    rows_by_layer: list = field(default_factory=list)

    TIMING_KEYS = ("t_comp_ms", "t_comm_ms", "t_reduce_ms", "t_sample_ms", "t_epoch_ms")

    def record(self) -> dict:
        """Deterministic fields only (safe to diff across runs)."""
        d = asdict(self)
        for k in self.TIMING_KEYS + ("rows_by_layer",):
            d.pop(k)
        return d

    def timings(self) -> dict:
        return {"epoch": self.epoch, **{k: getattr(self, k) for k in self.TIMING_KEYS}}


@dataclass
class TrainResult:
    params: list
    metrics: list
    worker_params: list
    param_digests: list  # [rank][epoch] sha1 of all parameters after the update
    phase_logs: list


def param_digest(params) -> str:
    h = hashlib.sha1()
    for x in params:
        h.update(np.ascontiguousarray(x).tobytes())
    return h.hexdigest()


def model_forward(graph: Graph, params, num_layers: int, nodes=None) -> np.ndarray:
    """Full-graph inference: no sampling, no dropout. Returns logits for ``nodes`` (all by default)."""
    tmpl = HaloTemplate.build(graph, np.arange(graph.num_nodes))
    sub = tmpl.restrict(np.zeros(0, dtype=bool))
    h = graph.features.astype(params[0].dtype)
    for layer in range(num_layers):
        h, _ = sage_forward(sub, h, params[2 * layer], params[2 * layer + 1],
                            activation=layer < num_layers - 1)
    return h if nodes is None else h[nodes]


def evaluate(params, graph: Graph, mask, num_layers: int | None = None) -> float:
    """Argmax accuracy over ``mask`` using full-graph inference."""
    num_layers = len(params) // 2 if num_layers is None else num_layers
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return float("nan")
    logits = model_forward(graph, params, num_layers)
    return float((logits[mask].argmax(axis=1) == graph.labels[mask]).mean())


def _halo_for_epoch(tmpl: HaloTemplate, config: TrainConfig, epoch: int, rank: int):
    """Sampled subgraph for this epoch and the halo scale passed to the layer."""
    n_in = tmpl.num_inner
    nb = len(tmpl.boundary_ids)
    if config.sampler == "bns":
        sel = select_boundary(tmpl.boundary_ids, config.p, epoch, config.seed, rank)
        return tmpl.restrict(sel), config.p
    q = config.p
    inv = 1.0 / q if q > 0 else 1.0
    if config.sampler == "bes":
        cross = tmpl.indices >= n_in
        keep = np.ones(len(tmpl.indices), dtype=bool)
        keep[cross] = edge_keep(tmpl.row_gid[cross], tmpl.col_gid[cross], q, epoch, config.seed)
        weight = np.where(cross, inv, 1.0)
    else:
        keep = edge_keep(tmpl.row_gid, tmpl.col_gid, q, epoch, config.seed, keyed.DROP_EDGE)
        weight = np.full(len(keep), inv)
    live = keep & (tmpl.indices >= n_in)
    sel = np.bincount(tmpl.indices[live] - n_in, minlength=nb) > 0
    return tmpl.restrict(sel, keep, weight), 1.0


class _Worker:
    """Per-partition state and the forward/backward half of one epoch."""

    def __init__(self, rank: int, comm: Comm, graph: Graph, plan: PartitionPlan, config: TrainConfig):
        self.rank, self.comm, self.plan, self.config = rank, comm, plan, config
        self.inner = plan.inner[rank]
        self.tmpl = HaloTemplate.build(graph, self.inner, rank)
        if not np.array_equal(self.tmpl.boundary_ids, plan.boundary[rank]):
            raise ValueError(f"plan boundary set of partition {rank} does not match the graph")
        self.dims = config.layer_dims(graph.features.shape[1], graph.num_classes)
        self.x = graph.features[self.inner].astype(config.dtype)
        self.labels = graph.labels[self.inner]
        self.train_mask = graph.train_mask[self.inner]
        n_train = int(graph.train_mask.sum())
        # per-partition sums scaled so the all-reduce mean equals the global mean loss
        self.normalizer = n_train / comm.size if n_train else 1.0

    def step(self, params, epoch: int, t: dict):
        """Sample, exchange, forward, backward. Returns local ``(grads, loss, sub)``."""
        comm, config, L = self.comm, self.config, self.config.num_layers
        t0 = time.perf_counter()
        sub, halo_scale = _halo_for_epoch(self.tmpl, config, epoch, self.rank)
        t["sample"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        view = broadcast_selection(comm, epoch, sub.halo_ids, self.plan.part_of, self.inner)
        t["comm"] += time.perf_counter() - t0

        h = self.x
        caches = []
        for layer in range(L):
            t0 = time.perf_counter()
            halo = exchange_features(comm, view, layer, h)
            t["comm"] += time.perf_counter() - t0
            t0 = time.perf_counter()
            stack = np.concatenate([h, halo]) if len(halo) else h
            rng = keyed.KeyedUniform(config.seed, keyed.DROPOUT, epoch, layer)
            h, cache = sage_forward(sub, stack, params[2 * layer], params[2 * layer + 1],
                                    halo_scale, activation=layer < L - 1, train=True,
                                    dropout_rate=config.dropout, rng=rng)
            caches.append(cache)
            t["comp"] += time.perf_counter() - t0
            t0 = time.perf_counter()
            comm.barrier(f"e{epoch}:fwd{layer}")
            t["comm"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        if self.train_mask.any():
            loss, g = softmax_xent(h, self.labels, self.train_mask, self.normalizer)
        else:
            loss, g = 0.0, np.zeros_like(h)
        grads = [None] * len(params)
        t["comp"] += time.perf_counter() - t0
        for layer in reversed(range(L)):
            t0 = time.perf_counter()
            g_w, g_b, g_stack = sage_backward(caches[layer], g)
            grads[2 * layer], grads[2 * layer + 1] = g_w, g_b
            t["comp"] += time.perf_counter() - t0
            if layer == 0:
                break  # input features are not trained; their halo gradients are never needed
            t0 = time.perf_counter()
            g = exchange_gradients(comm, view, layer, g_stack)
            comm.barrier(f"e{epoch}:bwd{layer}")
            t["comm"] += time.perf_counter() - t0
        return grads, loss, sub


def _new_timers() -> dict:
    return {"sample": 0.0, "comm": 0.0, "comp": 0.0, "reduce": 0.0}


def _train_worker(rank: int, comm: Comm, graph: Graph, plan: PartitionPlan, config: TrainConfig, eval_fn):
    worker = _Worker(rank, comm, graph, plan, config)
    params = init_params(worker.dims, config.seed, config.dtype)
    adam = AdamState.zeros_like(params)
    history = []
    digests = []
    for epoch in range(config.epochs):
        comm.counters.reset()
        t = _new_timers()
        t_start = time.perf_counter()
        grads, loss, sub = worker.step(params, epoch, t)

        t0 = time.perf_counter()
        reduced = allreduce(comm, grads + [np.array([loss], dtype=config.dtype)], epoch)
        t["reduce"] += time.perf_counter() - t0
        mean_loss = float(reduced[-1][0])
        if not np.isfinite(mean_loss):
            raise DivergenceError(f"non-finite loss at epoch {epoch}")
        t0 = time.perf_counter()
        adam_step(params, reduced[:-1], adam, config.lr)
        t["comp"] += time.perf_counter() - t0
        t_epoch = time.perf_counter() - t_start

        digests.append(param_digest(params))
        mem = sum(layer_memory(len(worker.inner), len(sub.halo_ids), d) for d in worker.dims[:-1])
        c = comm.counters
        stats = {
            "loss": mean_loss, "floats": c.floats_sent, "bytes": c.bytes_sent, "mem": mem,
            "rows": [c.rows_by_layer.get(layer, 0) for layer in range(config.num_layers)],
            "t": t, "t_epoch": t_epoch, "eval": None,
        }
        if eval_fn is not None and (epoch == config.epochs - 1 or
                                     (config.eval_every and (epoch + 1) % config.eval_every == 0)):
            stats["eval"] = eval_fn(params)
        history.append(stats)
    return params, history, digests, comm.phase_log


def _is_abort(exc) -> bool:
    return isinstance(exc, ProtocolError) and ("aborted" in str(exc) or "broken" in str(exc))


def run_workers(m: int, fn, timeout: float = 60.0) -> list:
    """Run ``fn(rank, comm)`` on ``m`` threads sharing one fabric; return results by rank.

    If any worker fails the fabric is aborted so peers stop waiting, and the
    original failure is re-raised.
    """
    fabric = Fabric(m, timeout)

    def run(rank):
        try:
            return fn(rank, fabric.endpoint(rank))
        except BaseException:
            fabric.abort()
            raise

    with ThreadPoolExecutor(max_workers=m) as pool:
        futures = [pool.submit(run, r) for r in range(m)]
        errors, results = [], []
        for f in futures:
            try:
                results.append(f.result())
            except BaseException as exc:
                errors.append(exc)
    if errors:
        primary = [e for e in errors if not _is_abort(e)]
        raise (primary or errors)[0]
    return results


def distributed_gradients(graph: Graph, plan: PartitionPlan, config: TrainConfig, params, epoch: int = 0):
    """All-reduced weight gradients and loss of one distributed step at ``params`` (no update)."""

    def fn(rank, comm):
        worker = _Worker(rank, comm, graph, plan, config)
        grads, loss, _ = worker.step([x.copy() for x in params], epoch, _new_timers())
        reduced = allreduce(comm, grads + [np.array([loss], dtype=config.dtype)], epoch)
        return reduced[:-1], float(reduced[-1][0])

    return run_workers(plan.num_parts, fn, config.timeout)


def train(graph: Graph, plan: PartitionPlan, config: TrainConfig, evaluate_during: bool = True) -> TrainResult:
    """Run partition-parallel training with one thread per partition.

    Validation/test accuracy is computed by worker 0 with full-graph inference
    every ``config.eval_every`` epochs and after the last one.
    """

    def eval_fn(params):
        return (evaluate(params, graph, graph.val_mask, config.num_layers),
                evaluate(params, graph, graph.test_mask, config.num_layers))

    results = run_workers(
        plan.num_parts,
        lambda rank, comm: _train_worker(rank, comm, graph, plan, config,
                                         eval_fn if (rank == 0 and evaluate_during) else None),
        config.timeout)

    metrics = []
    for epoch in range(config.epochs):
        per = [res[1][epoch] for res in results]
        ev = per[0]["eval"]
        mems = [s["mem"] for s in per]
        metrics.append(EpochMetrics(
            epoch=epoch,
            loss=per[0]["loss"],
            val_acc=None if ev is None else ev[0],
            test_acc=None if ev is None else ev[1],
            floats_sent=int(sum(s["floats"] for s in per)),
            bytes_sent=int(sum(s["bytes"] for s in per)),
            mem_est_scalars_max=int(max(mems)),
            mem_est_scalars_min=int(min(mems)),
            t_comp_ms=1e3 * max(s["t"]["comp"] for s in per),
            t_comm_ms=1e3 * max(s["t"]["comm"] for s in per),
            t_reduce_ms=1e3 * max(s["t"]["reduce"] for s in per),
            t_sample_ms=1e3 * max(s["t"]["sample"] for s in per),
            t_epoch_ms=1e3 * max(s["t_epoch"] for s in per),
            rows_by_layer=[int(sum(s["rows"][k] for s in per)) for k in range(config.num_layers)],
        ))
    return TrainResult(
        params=results[0][0],
        metrics=metrics,
        worker_params=[r[0] for r in results],
        param_digests=[r[2] for r in results],
        phase_logs=[r[3] for r in results],
    )


def _full_graph_view(graph: Graph):
    tmpl = HaloTemplate.build(graph, np.arange(graph.num_nodes))
    return tmpl.restrict(np.zeros(0, dtype=bool))


def reference_gradients(graph: Graph, config: TrainConfig, params, epoch: int = 0, sub=None):
    """Full-graph weight gradients and mean training loss at ``params``."""
    sub = _full_graph_view(graph) if sub is None else sub
    L = config.num_layers
    h = graph.features.astype(config.dtype)
    caches = []
    for layer in range(L):
        rng = keyed.KeyedUniform(config.seed, keyed.DROPOUT, epoch, layer)
        h, cache = sage_forward(sub, h, params[2 * layer], params[2 * layer + 1],
                                activation=layer < L - 1, train=True,
                                dropout_rate=config.dropout, rng=rng)
        caches.append(cache)
    loss, g = softmax_xent(h, graph.labels, graph.train_mask)
    grads = [None] * len(params)
    for layer in reversed(range(L)):
        g_w, g_b, g = sage_backward(caches[layer], g)
        grads[2 * layer], grads[2 * layer + 1] = g_w, g_b
    return grads, float(loss)


def train_reference(graph: Graph, config: TrainConfig):
    """Single-process full-graph trainer with the same model, init, dropout masks and optimizer.

    Returns ``(params, per-epoch losses)``.
    """
    sub = _full_graph_view(graph)
    dims = config.layer_dims(graph.features.shape[1], graph.num_classes)
    params = init_params(dims, config.seed, config.dtype)
    adam = AdamState.zeros_like(params)
    losses = []
    for epoch in range(config.epochs):
        grads, loss = reference_gradients(graph, config, params, epoch, sub)
        if not np.isfinite(loss):
            raise DivergenceError(f"non-finite loss at epoch {epoch}")
        adam_step(params, grads, adam, config.lr)
        losses.append(loss)
    return params, losses
