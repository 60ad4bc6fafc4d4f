"""Command-line driver: gen-sbm, partition, analyze, train, variance, bench.

Machine-readable results go to files or stdout (JSON / JSONL / CSV); human
summaries go to stderr. Exit codes: 0 ok, 1 usage error, 2 runtime failure,
3 oracle check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .data import SbmSpec, generate_sbm, load_dataset, save_dataset
from .partition import load_assignment, partition_greedy, partition_random, save_assignment
from .plan import (boundary_inner_ratios, build_plan, comm_volume, comm_volume_edgewise,
                   cut_edges, memory_estimate)
from .runtime import TrainConfig, train, train_reference
from .variance import variance_sweep, write_csv

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_ORACLE = 0, 1, 2, 3
ORACLE_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _warn_p(ps) -> None:
    if any(p == 0 for p in ps):
        _say("warning: p=0 isolates every partition (no boundary information); not recommended")


def _load(args):
    graph = load_dataset(args.dir)
    if getattr(args, "assignment", None):
        assignment = load_assignment(args.assignment, graph.num_nodes)
    elif getattr(args, "parts", None):
        assignment = partition_greedy(graph, args.parts, 0.0, args.seed)
    else:
        raise UsageError("either --assignment or --parts is required")
    return graph, assignment, build_plan(graph, assignment)


def cmd_gen_sbm(args) -> int:
    spec = SbmSpec(args.blocks, args.size, args.pin, args.pout, args.dim, args.mean_scale,
                   tuple(args.split))
    graph = generate_sbm(spec, args.seed)
    save_dataset(graph, args.out)
    _say(f"wrote {graph.num_nodes} nodes, {graph.num_edges} edges to {args.out}")
    return EXIT_OK


def cmd_partition(args) -> int:
    graph = load_dataset(args.dir)
    if args.method == "random":
        a = partition_random(graph, args.parts, args.seed)
    elif args.method == "greedy":
        a = partition_greedy(graph, args.parts, args.slack, args.seed)
    else:
        if not args.file:
            raise UsageError("--method file needs --file")
        a = load_assignment(args.file, graph.num_nodes)
    save_assignment(a, args.out)
    total, _ = comm_volume(build_plan(graph, a))
    _say(f"{a.num_parts} parts, sizes {a.sizes.tolist()}, boundary nodes {total}")
    return EXIT_OK


def analyze_report(graph, plan, dims, p_list, scalar_bytes: int = 4) -> dict:
    total, send = comm_volume(plan)
    ratios = boundary_inner_ratios(plan)
    mem = {}
    for p in p_list:
        est = memory_estimate(plan, dims, p)
        mem[str(p)] = {
            "per_partition": est["per_partition"].tolist(),
            "max": float(est["max"]), "min": float(est["min"]), "total": float(est["total"]),
            "bytes_max": float(est["max"]) * scalar_bytes,
        }
    return {
        "num_nodes": graph.num_nodes,
        "num_edges": graph.num_edges,
        "num_parts": plan.num_parts,
        "inner": [len(v) for v in plan.inner],
        "boundary": [len(b) for b in plan.boundary],
        "ratios": ratios["ratios"].tolist(),
        "ratio_stats": {k: ratios[k] for k in ("min", "q1", "median", "q3", "max", "straggler")},
        "vol_total": total,
        "vol_send": send.tolist(),
        "vol_edgewise": comm_volume_edgewise(graph, plan.part_of),
        "edge_cut": cut_edges(graph, plan.part_of),
        "dims": list(dims),
        "memory_scalars": mem,
    }


def cmd_analyze(args) -> int:
    graph, _, plan = _load(args)
    dims = args.dims or [graph.features.shape[1]]
    report = analyze_report(graph, plan, dims, args.p, args.scalar_bytes)
    print(json.dumps(report, indent=2))
    _say(f"Vol_total={report['vol_total']}  max boundary/inner ratio={report['ratio_stats']['max']:.2f}")
    return EXIT_OK


def _config(args, p) -> TrainConfig:
    return TrainConfig(num_layers=args.layers, hidden=args.hidden, dropout=args.dropout, lr=args.lr,
                       epochs=args.epochs, p=p, seed=args.seed, precision=args.precision,
                       eval_every=args.eval_every, sampler=args.sampler)


def cmd_train(args) -> int:
    graph, _, plan = _load(args)
    _warn_p([args.p])
    if args.oracle and args.p != 1.0 and plan.num_parts > 1:
        raise UsageError("--oracle compares against full-graph training and needs --p 1.0 "
                         "(or a single partition)")
    if args.oracle and args.sampler != "bns":
        raise UsageError("--oracle only applies to the bns sampler")
    config = _config(args, args.p)
    result = train(graph, plan, config)
    Path(args.metrics).parent.mkdir(parents=True, exist_ok=True)
    with open(args.metrics, "w") as f:
        for m in result.metrics:
            f.write(json.dumps(m.record(), sort_keys=True) + "\n")
    if args.timings:
        with open(args.timings, "w") as f:
            for m in result.metrics:
                f.write(json.dumps(m.timings(), sort_keys=True) + "\n")
    last = result.metrics[-1]
    _say(f"epochs={config.epochs} loss={last.loss:.4f} val_acc={last.val_acc} "
         f"test_acc={last.test_acc} floats/epoch={last.floats_sent}")
    if args.oracle:
        _, ref = train_reference(graph, config)
        dev = max(abs(m.loss - r) / max(abs(r), 1e-300) for m, r in zip(result.metrics, ref))
        print(json.dumps({"oracle_max_rel_deviation": dev}))
        _say(f"oracle: max relative loss deviation {dev:.3e}")
        if not dev < ORACLE_TOL:
            _say(f"oracle check FAILED (tolerance {ORACLE_TOL})")
            return EXIT_ORACLE
    return EXIT_OK


def cmd_variance(args) -> int:
    graph, _, plan = _load(args)
    if any(p <= 0 for p in args.p_list):
        raise UsageError("variance needs every p in (0, 1]")
    rng = np.random.default_rng(args.seed)
    w = rng.normal(size=(graph.features.shape[1], args.out_dim)) / np.sqrt(graph.features.shape[1])
    rows = variance_sweep(graph, plan, graph.features, w, args.p_list, args.trials, args.seed)
    write_csv(rows, args.out)
    for r in rows:
        _say(f"p={r['p']:<6} empirical={r['empirical']:.4e} bound={r['bound']:.4e}")
    return EXIT_OK


BENCH_FIELDS = ("p", "epoch_ms", "comp_ms", "comm_ms", "reduce_ms", "sample_ms", "sample_pct",
                "floats_per_epoch", "bytes_per_epoch", "mem_max", "mem_min", "test_acc")


def bench_rows(graph, plan, base: TrainConfig, p_list) -> list:
    rows = []
    for p in p_list:
        result = train(graph, plan, replace(base, p=p, eval_every=0))
        ms = result.metrics[1:] if len(result.metrics) > 1 else result.metrics
        mean = lambda key: float(np.mean([getattr(m, key) for m in ms]))
        epoch_ms = mean("t_epoch_ms")
        rows.append({
            "p": p,
            "epoch_ms": epoch_ms,
            "comp_ms": mean("t_comp_ms"),
            "comm_ms": mean("t_comm_ms"),
            "reduce_ms": mean("t_reduce_ms"),
            "sample_ms": mean("t_sample_ms"),
            "sample_pct": 100.0 * mean("t_sample_ms") / epoch_ms if epoch_ms else 0.0,
            "floats_per_epoch": mean("floats_sent"),
            "bytes_per_epoch": mean("bytes_sent"),
            "mem_max": mean("mem_est_scalars_max"),
            "mem_min": mean("mem_est_scalars_min"),
            "test_acc": result.metrics[-1].test_acc,
        })
    return rows


def cmd_bench(args) -> int:
    graph, _, plan = _load(args)
    _warn_p(args.p_list)
    rows = bench_rows(graph, plan, _config(args, 1.0), args.p_list)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    for r in rows:
        _say(f"p={r['p']:<5} epoch={r['epoch_ms']:.2f}ms comp={r['comp_ms']:.2f} "
             f"comm={r['comm_ms']:.2f} reduce={r['reduce_ms']:.2f} sample={r['sample_ms']:.2f} "
             f"({r['sample_pct']:.1f}%)")
    return EXIT_OK


def _add_training_flags(sp, epochs_default=100):
    sp.add_argument("--layers", type=int, default=2)
    sp.add_argument("--hidden", type=int, default=64)
    sp.add_argument("--lr", type=float, default=0.01)
    sp.add_argument("--epochs", type=int, default=epochs_default)
    sp.add_argument("--dropout", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--eval-every", type=int, default=1)
    sp.add_argument("--sampler", choices=("bns", "bes", "dropedge"), default="bns")


def _add_source(sp):
    sp.add_argument("dir")
    sp.add_argument("--assignment")
    sp.add_argument("--parts", type=int, help="greedy-partition on the fly instead of --assignment")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="partgcn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen-sbm", help="generate a stochastic block model dataset")
    sp.add_argument("--blocks", type=int, required=True)
    sp.add_argument("--size", type=int, required=True, help="nodes per block")
    sp.add_argument("--pin", type=float, required=True)
    sp.add_argument("--pout", type=float, required=True)
    sp.add_argument("--dim", type=int, default=16)
    sp.add_argument("--mean-scale", type=float, default=1.0)
    sp.add_argument("--split", type=_floats, default=[0.6, 0.2, 0.2])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_sbm)

    sp = sub.add_parser("partition", help="assign nodes to partitions")
    sp.add_argument("dir")
    sp.add_argument("--method", choices=("random", "greedy", "file"), default="greedy")
    sp.add_argument("--parts", type=int, default=2)
    sp.add_argument("--file")
    sp.add_argument("--slack", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("analyze", help="boundary statistics and cost model report (JSON)")
    _add_source(sp)
    sp.add_argument("--dims", type=_ints)
    sp.add_argument("--p", type=_floats, default=[1.0])
    sp.add_argument("--scalar-bytes", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("train", help="partition-parallel training")
    _add_source(sp)
    _add_training_flags(sp)
    sp.add_argument("--p", type=float, default=0.1)
    sp.add_argument("--metrics", required=True)
    sp.add_argument("--timings", help="optional JSONL of per-epoch wall-clock breakdowns")
    sp.add_argument("--precision", choices=("f32", "f64"), default="f64")
    sp.add_argument("--oracle", action="store_true")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("variance", help="sampled-propagation error vs. its bound (CSV)")
    _add_source(sp)
    sp.add_argument("--p-list", type=_floats, default=[0.1, 0.5, 1.0])
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--out-dim", type=int, default=16)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_variance)

    sp = sub.add_parser("bench", help="per-epoch time breakdown over sampling rates (CSV)")
    _add_source(sp)
    _add_training_flags(sp, epochs_default=20)
    sp.add_argument("--p-list", type=_floats, default=[1.0, 0.1, 0.01])
    sp.add_argument("--precision", choices=("f32", "f64"), default="f32")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE
    except (FileNotFoundError, ValueError) as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE if isinstance(exc, FileNotFoundError) else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        _say(f"runtime failure: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
