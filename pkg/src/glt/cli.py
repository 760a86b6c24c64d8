"""Experiment driver: train baselines, run sparsification rounds, find
tickets, run baseline sweeps, and analyze graphs.

Config precedence: built-in defaults -> task defaults -> --paper-faithful
preset -> JSON config file -> command-line flags. Environment variables are
never consulted.
"""

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from glt import data as dataio
from glt.analysis import macs_for_model, measure_graph
from glt.checkpoint import load_checkpoint, save_checkpoint, ticket_arrays
from glt.graphs import EdgeMask, Graph, remove_pruned_edges
from glt.model import WeightMask, init_params
from glt.pruning import LinkTask, NodeTask, RoundConfig
from glt.tickets import (
    SearchConfig,
    evaluate_ticket,
    find_glt,
    prune_schedule,
    random_prune_counts,
    random_ticket,
)

RESULTS_VERSION_LINE = "# glt results v1"
RESULTS_COLUMNS = ("seed,method,round,graph_sparsity,weight_sparsity,macs,"
                   "val_metric,test_metric,wall_seconds")

# Best-configuration table for the small citation benchmarks; used verbatim
# by --paper-faithful (which also sets hidden_dim=512) and as task defaults.
HPARAMS = {
    ("node", "cora"): dict(iterations=200, lr=8e-3, weight_decay=8e-5,
                           edge_l1=1e-2, weight_l1=1e-2),
    ("node", "citeseer"): dict(iterations=200, lr=1e-2, weight_decay=5e-4,
                               edge_l1=1e-2, weight_l1=1e-2),
    ("node", "pubmed"): dict(iterations=200, lr=1e-2, weight_decay=5e-4,
                             edge_l1=1e-6, weight_l1=1e-3),
    ("link", "cora"): dict(iterations=200, lr=1e-3, weight_decay=0.0,
                           edge_l1=1e-4, weight_l1=1e-4),
    ("link", "citeseer"): dict(iterations=200, lr=1e-3, weight_decay=0.0,
                               edge_l1=1e-4, weight_l1=1e-4),
    ("link", "pubmed"): dict(iterations=200, lr=1e-3, weight_decay=0.0,
                             edge_l1=1e-4, weight_l1=1e-4),
}

MODES = ("dense", "ugs", "glt", "random-prune", "random-glt", "analyze")

ROUND_FIELDS = ("iterations", "lr", "mask_lr_edge", "mask_lr_weight", "edge_l1",
                "weight_l1", "weight_decay", "edge_prune_frac",
                "weight_prune_frac", "carry_mask_values")


class CliError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    mode: str = "dense"
    task: str = "node"
    dataset: str = None
    out: str = None
    hidden_dim: int = 16
    embed_dim: int = 16
    seeds: list = field(default_factory=lambda: [0])
    rounds: int = 4
    target_graph_sparsity: float = None  # None: run all `rounds` rounds
    target_weight_sparsity: float = None
    iterations: int = 200
    lr: float = 8e-3
    mask_lr_edge: float = 1e-2
    mask_lr_weight: float = 1e-2
    edge_l1: float = 1e-2
    weight_l1: float = 1e-2
    weight_decay: float = 8e-5
    edge_prune_frac: float = 0.05
    weight_prune_frac: float = 0.20
    carry_mask_values: bool = False
    paper_faithful: bool = False

    def round_config(self, seed):
        kw = {f: getattr(self, f) for f in ROUND_FIELDS}
        return RoundConfig(seed=seed, **kw)

    def search_config(self, seed):
        tg = self.target_graph_sparsity
        tw = self.target_weight_sparsity
        return SearchConfig(
            target_graph_sparsity=0.999999 if tg is None else tg,
            target_weight_sparsity=0.999999 if tw is None else tw,
            max_rounds=self.rounds,
            round=self.round_config(seed),
        )


def _dataset_key(name):
    for key in ("cora", "citeseer", "pubmed"):
        if key in name.lower():
            return key
    return "cora"


def build_config(args):
    cfg = ExperimentConfig()
    provided = {k: v for k, v in vars(args).items() if v is not None}
    allowed = {f.name for f in dataclasses.fields(ExperimentConfig)}

    def apply(mapping, source):
        for k, v in mapping.items():
            if k not in allowed:
                raise CliError(
                    f"{source}: unknown config key {k!r} (allowed: "
                    f"{', '.join(sorted(allowed))})"
                )
            setattr(cfg, k, v)

    task = provided.get("task", cfg.task)
    dataset_name = Path(provided.get("dataset", "")).name
    apply(HPARAMS[(task, _dataset_key(dataset_name))], "task defaults")
    if provided.get("paper_faithful"):
        cfg.hidden_dim = 512
        cfg.embed_dim = 512
        cfg.paper_faithful = True
    if provided.get("config"):
        path = Path(provided.pop("config"))
        if not path.exists():
            raise CliError(f"config file not found: {path}")
        apply(json.loads(path.read_text()), str(path))
    provided.pop("config", None)
    provided.pop("func", None)
    apply({k: v for k, v in provided.items() if k in allowed}, "flags")
    if cfg.mode not in MODES:
        raise CliError(f"unknown mode {cfg.mode!r}")
    if cfg.dataset is None or not Path(cfg.dataset).exists():
        raise CliError(f"dataset path does not exist: {cfg.dataset}")
    if cfg.out is None:
        raise CliError("--out is required")
    return cfg


def load_task(config):
    ds = dataio.read_dataset(config.dataset)
    if ds.splits.task != config.task:
        raise CliError(
            f"dataset splits are for task {ds.splits.task!r}, requested "
            f"{config.task!r} (run make-splits first)"
        )
    if config.task == "node":
        task = NodeTask(ds.graph.labels, ds.splits.train_nodes,
                        ds.splits.val_nodes, ds.splits.test_nodes)
        return ds, ds.graph, task
    graph = Graph(ds.graph.num_nodes, ds.graph.features,
                  ds.splits.train_edges, ds.graph.labels)
    task = LinkTask(ds.splits, ds.graph.num_nodes, embed_dim=config.embed_dim)
    return ds, graph, task


class ResultsWriter:
    """Incremental results.csv writer; rows are flushed as they land."""

    def __init__(self, path):
        self.fh = open(path, "w")
        self.fh.write(RESULTS_VERSION_LINE + "\n")
        self.fh.write(RESULTS_COLUMNS + "\n")
        self.fh.flush()

    def row(self, seed, method, round_idx, gs, ws, macs, val, test, wall):
        self.fh.write(
            f"{seed},{method},{round_idx},{gs!r},{ws!r},{macs},"
            f"{val:.6f},{test:.6f},{wall:.3f}\n"
        )
        self.fh.flush()

    def close(self):
        self.fh.close()


def _dense_macs(graph, params):
    return macs_for_model(
        graph.num_nodes, EdgeMask.ones(graph.num_edges), WeightMask.ones(params),
        [(params.in_dim, params.hidden_dim), (params.hidden_dim, params.out_dim)],
    ).total


def _write_report(path, report):
    lines = ["round graph_sparsity weight_sparsity macs val test round_val round_test"]
    for r in report.records:
        lines.append(
            f"{r.round} {r.graph_sparsity:.6f} {r.weight_sparsity:.6f} {r.macs} "
            f"{r.val_metric:.6f} {r.test_metric:.6f} "
            f"{r.round_val:.6f} {r.round_test:.6f}"
        )
    lines.append(f"snapshot_hash {report.snapshot_hash}")
    Path(path).write_text("\n".join(lines) + "\n")


def run(config):
    """Execute one experiment; writes results.csv, logs, checkpoints."""
    ds, graph, task = load_task(config)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    writer = ResultsWriter(outdir / "results.csv")
    summary = []
    try:
        for seed in config.seeds:
            params = init_params(graph.feature_dim, config.hidden_dim,
                                 task.out_dim, seed=seed)
            scfg = config.search_config(seed)
            t0 = time.perf_counter()
            if config.mode == "dense":
                from glt.pruning import train_model
                from glt.tickets import retrain_config

                params.rewind()
                res = train_model(graph, params, retrain_config(scfg.round), task)
                writer.row(seed, "dense", 0, 0.0, 0.0, _dense_macs(graph, params),
                           res.best_val, res.test_at_best,
                           time.perf_counter() - t0)
                summary.append(f"seed {seed}: dense best val {res.best_val:.4f} "
                               f"test {res.test_at_best:.4f}")
            elif config.mode in ("ugs", "glt"):
                if config.mode == "ugs":
                    scfg = dataclasses.replace(scfg, max_rounds=1)
                log_path = outdir / f"train_seed{seed}.jsonl"
                with open(log_path, "w") as log_fh:
                    report = find_glt(graph, params, scfg, task, log_fh=log_fh)
                for rec in report.records:
                    writer.row(seed, config.mode, rec.round, rec.graph_sparsity,
                               rec.weight_sparsity, rec.macs, rec.val_metric,
                               rec.test_metric, rec.wall_seconds)
                save_checkpoint(
                    outdir / f"ticket_seed{seed}.ckpt",
                    ticket_arrays(params, report.edge_mask, report.weight_mask),
                )
                _write_report(outdir / f"report_seed{seed}.txt", report)
                final = report.final()
                summary.append(
                    f"seed {seed}: {config.mode} final round {final.round} "
                    f"sparsity ({final.graph_sparsity:.4f}, "
                    f"{final.weight_sparsity:.4f}) test {final.test_metric:.4f}"
                )
            elif config.mode in ("random-prune", "random-glt"):
                tg = config.target_graph_sparsity or 0.0
                tw = config.target_weight_sparsity or 0.0
                if config.mode == "random-glt":
                    params = init_params(graph.feature_dim, config.hidden_dim,
                                         task.out_dim, seed=seed + 10_000)
                edge_mask = EdgeMask.ones(graph.num_edges)
                weight_mask = WeightMask.ones(params)
                kill_e = int(tg * edge_mask.num_slots + 1e-9)
                kill_w = int(tw * weight_mask.total() + 1e-9)
                new_e, new_w = random_prune_counts(
                    edge_mask, weight_mask,
                    edge_mask.num_slots - kill_e, weight_mask.total() - kill_w,
                    np.random.default_rng(seed),
                )
                res = evaluate_ticket(graph, params, new_e.alive, new_w,
                                      scfg.round, task)
                macs = macs_for_model(
                    graph.num_nodes, new_e, new_w,
                    [(params.in_dim, params.hidden_dim),
                     (params.hidden_dim, params.out_dim)],
                ).total
                writer.row(seed, config.mode, 1,
                           1 - new_e.alive_count() / new_e.num_slots,
                           new_w.sparsity(), macs, res.best_val,
                           res.test_at_best, time.perf_counter() - t0)
                summary.append(f"seed {seed}: {config.mode} test "
                               f"{res.test_at_best:.4f}")
            else:
                raise CliError(f"mode {config.mode!r} is not runnable here")
    finally:
        writer.close()
    (Path(config.out) / "summary.txt").write_text("\n".join(summary) + "\n")
    return 0


def sweep(config):
    """Matched-sparsity series: ticket chain plus random pruning at the same
    alive counts, combined into one CSV."""
    ds, graph, task = load_task(config)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    writer = ResultsWriter(outdir / "results.csv")
    try:
        for seed in config.seeds:
            params = init_params(graph.feature_dim, config.hidden_dim,
                                 task.out_dim, seed=seed)
            scfg = config.search_config(seed)
            report = find_glt(graph, params, scfg, task)
            for rec in report.records:
                writer.row(seed, "glt", rec.round, rec.graph_sparsity,
                           rec.weight_sparsity, rec.macs, rec.val_metric,
                           rec.test_metric, rec.wall_seconds)
            weight_total = WeightMask.ones(params).total()
            e_sched = prune_schedule(graph.num_edges, scfg.round.edge_prune_frac,
                                     config.rounds)
            w_sched = prune_schedule(weight_total, scfg.round.weight_prune_frac,
                                     config.rounds)
            for rec in report.records[1:]:
                t1 = time.perf_counter()
                k = rec.round
                res, new_e, new_w = random_ticket(
                    graph, params, task, scfg, e_sched[k - 1], w_sched[k - 1],
                    seed * 1000 + k,
                )
                writer.row(seed, "random-prune", k, rec.graph_sparsity,
                           rec.weight_sparsity,
                           macs_for_model(
                               graph.num_nodes, new_e, new_w,
                               [(params.in_dim, params.hidden_dim),
                                (params.hidden_dim, params.out_dim)]).total,
                           res.best_val, res.test_at_best,
                           time.perf_counter() - t1)
    finally:
        writer.close()
    return 0


def analyze(args):
    """One structured record per graph: the three measures plus sparsity and
    MACs (dense dims, or masked dims when a checkpoint is given)."""
    ds = dataio.read_dataset(args.dataset)
    graph = ds.graph
    hidden = args.hidden_dim or 16
    out_dim = max(ds.num_classes, 1)
    records = []

    def record(tag, g, edge_sparsity, weight_sparsity, alive_edges, alive_w, dims):
        m = measure_graph(g)
        macs = None
        if dims is not None:
            from glt.analysis import macs_count
            macs = macs_count(g.num_nodes, alive_edges, alive_w, dims).total
        records.append({
            "graph": tag,
            "num_nodes": g.num_nodes,
            "num_edges": g.num_edges,
            "graph_sparsity": edge_sparsity,
            "weight_sparsity": weight_sparsity,
            "macs": macs,
            "avg_clustering": m.avg_clustering,
            "avg_node_betweenness": m.avg_node_betweenness,
            "avg_edge_betweenness": m.avg_edge_betweenness,
        })

    dense_dims = [(graph.feature_dim, hidden), (hidden, out_dim)]
    record("original", graph, 0.0, 0.0, graph.num_edges,
           [a * b for a, b in dense_dims], dense_dims)
    if args.checkpoint:
        arrays = load_checkpoint(args.checkpoint)
        alive = arrays["edge_mask_alive"]
        if alive.shape[0] != graph.num_edges:
            raise CliError("checkpoint edge mask does not match the dataset")
        mask = EdgeMask(alive.astype(np.float32), alive)
        pruned = remove_pruned_edges(graph, mask)
        w_alive = [arrays["weight_mask0_alive"], arrays["weight_mask1_alive"]]
        dims = [w_alive[0].shape, w_alive[1].shape]
        total_w = sum(a.size for a in w_alive)
        record("pruned", pruned,
               1 - alive.sum() / alive.size,
               1 - sum(int(a.sum()) for a in w_alive) / total_w,
               int(alive.sum()), [int(a.sum()) for a in w_alive], dims)
    text = "\n".join(json.dumps(r) for r in records)
    print(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    return 0


def _add_run_flags(p, include_mode=None):
    p.add_argument("--config", help="JSON config file (schema: ExperimentConfig)")
    p.add_argument("--dataset", help="portable dataset directory")
    p.add_argument("--task", choices=("node", "link"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--seeds", type=lambda s: [int(x) for x in s.split(",")],
                   help="comma-separated seed list")
    p.add_argument("--hidden-dim", type=int, dest="hidden_dim")
    p.add_argument("--embed-dim", type=int, dest="embed_dim")
    p.add_argument("--rounds", type=int)
    p.add_argument("--target-graph-sparsity", type=float,
                   dest="target_graph_sparsity")
    p.add_argument("--target-weight-sparsity", type=float,
                   dest="target_weight_sparsity")
    p.add_argument("--iterations", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--mask-lr-edge", type=float, dest="mask_lr_edge")
    p.add_argument("--mask-lr-weight", type=float, dest="mask_lr_weight")
    p.add_argument("--edge-l1", type=float, dest="edge_l1")
    p.add_argument("--weight-l1", type=float, dest="weight_l1")
    p.add_argument("--weight-decay", type=float, dest="weight_decay")
    p.add_argument("--edge-prune-frac", type=float, dest="edge_prune_frac")
    p.add_argument("--weight-prune-frac", type=float, dest="weight_prune_frac")
    p.add_argument("--carry-mask-values", action="store_const", const=True,
                   dest="carry_mask_values")
    p.add_argument("--paper-faithful", action="store_const", const=True,
                   dest="paper_faithful",
                   help="512 hidden units and the benchmark hyperparameter table")
    if include_mode:
        p.add_argument("--mode", choices=include_mode)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="glt")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="dense training (or one ugs round)")
    _add_run_flags(p_train, include_mode=("dense", "ugs"))
    p_train.set_defaults(func=lambda a: run(_cfg(a, "dense")))

    p_glt = sub.add_parser("glt", help="iterative sparsification ticket search")
    _add_run_flags(p_glt, include_mode=("glt", "random-prune", "random-glt"))
    p_glt.set_defaults(func=lambda a: run(_cfg(a, "glt")))

    p_sweep = sub.add_parser("sweep", help="matched-sparsity ticket/random series")
    _add_run_flags(p_sweep)
    p_sweep.set_defaults(func=lambda a: sweep(_cfg(a, "glt")))

    p_an = sub.add_parser("analyze", help="graph measures, sparsity, and MACs")
    p_an.add_argument("dataset")
    p_an.add_argument("--checkpoint")
    p_an.add_argument("--hidden-dim", type=int, dest="hidden_dim")
    p_an.add_argument("--out")
    p_an.set_defaults(func=analyze)

    p_ms = sub.add_parser("make-splits", help="regenerate dataset splits")
    p_ms.add_argument("dataset")
    p_ms.add_argument("--task", choices=("node", "link"), required=True)
    p_ms.add_argument("--seed", type=int, default=0)
    p_ms.add_argument("--train-per-class", type=int, default=20)
    p_ms.add_argument("--num-val", type=int, default=500)
    p_ms.add_argument("--num-test", type=int, default=1000)
    p_ms.set_defaults(func=make_splits_cmd)

    p_sy = sub.add_parser("synth", help="generate a synthetic dataset")
    p_sy.add_argument("--style", choices=("citation", "sbm"), default="citation")
    p_sy.add_argument("--out", required=True)
    p_sy.add_argument("--seed", type=int, default=7)
    p_sy.add_argument("--nodes", type=int)
    p_sy.add_argument("--classes", type=int)
    p_sy.add_argument("--feature-dim", type=int, dest="feature_dim")
    p_sy.add_argument("--p-in", type=float, dest="p_in", default=0.1)
    p_sy.add_argument("--p-out", type=float, dest="p_out", default=0.01)
    p_sy.add_argument("--name", default=None)
    p_sy.set_defaults(func=synth_cmd)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, dataio.DatasetFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cfg(args, default_mode):
    if getattr(args, "mode", None) is None:
        args.mode = default_mode
    return build_config(args)


def make_splits_cmd(args):
    ds = dataio.read_dataset(args.dataset)
    if args.task == "node":
        splits = dataio.make_node_splits(ds.graph, args.seed,
                                         args.train_per_class, args.num_val,
                                         args.num_test)
    else:
        splits = dataio.make_link_splits(ds.graph, args.seed)
    dataio.write_splits(splits, Path(args.dataset) / "splits")
    print(f"wrote {args.task} splits to {Path(args.dataset) / 'splits'}")
    return 0


def synth_cmd(args):
    if args.style == "citation":
        kw = {}
        if args.nodes:
            kw["num_nodes"] = args.nodes
        if args.classes:
            kw["num_classes"] = args.classes
        if args.feature_dim:
            kw["feature_dim"] = args.feature_dim
        if args.name:
            kw["name"] = args.name
        ds = dataio.synth_citation(seed=args.seed, **kw)
    else:
        ds = dataio.synth_sbm(
            n=args.nodes or 200, classes=args.classes or 4, p_in=args.p_in,
            p_out=args.p_out, feature_dim=args.feature_dim or 16,
            seed=args.seed, name=args.name or "sbm",
        )
    dataio.write_dataset(ds, args.out)
    print(f"wrote {ds.name} ({ds.graph.num_nodes} nodes, "
          f"{ds.graph.num_edges} edges) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
