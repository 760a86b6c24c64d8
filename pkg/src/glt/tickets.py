"""Iterative sparsification with weight rewinding: locate lottery tickets,
plus the random-pruning and random-reinitialization baselines."""

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from glt.analysis import macs_for_model
from glt.graphs import EdgeMask, graph_sparsity, remove_pruned_edges
from glt.model import WeightMask, init_params
from glt.pruning import RoundConfig, threshold_masks, train_model, ugs_round


@dataclass
class SearchConfig:
    target_graph_sparsity: float = 0.0
    target_weight_sparsity: float = 0.0
    max_rounds: int = 20
    round: RoundConfig = field(default_factory=RoundConfig)

    def __post_init__(self):
        if not (0 <= self.target_graph_sparsity < 1):
            raise ValueError("graph sparsity target must lie in [0, 1)")
        if not (0 <= self.target_weight_sparsity < 1):
            raise ValueError("weight sparsity target must lie in [0, 1)")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")


@dataclass
class RoundRecord:
    round: int
    graph_sparsity: float
    weight_sparsity: float
    macs: int
    val_metric: float      # isolated retrain of the ticket
    test_metric: float
    round_val: float       # metrics of the mask-training round itself
    round_test: float
    wall_seconds: float = 0.0
    edge_alive: np.ndarray = field(repr=False, default=None)
    weight_alive: list = field(repr=False, default=None)


@dataclass
class TicketReport:
    records: list
    edge_mask: EdgeMask
    weight_mask: WeightMask
    snapshot_hash: str

    def final(self):
        return self.records[-1]


def rewind(params):
    """Reset weights to the initialization snapshot; masks are untouched."""
    params.rewind()


def retrain_config(config):
    """Ticket evaluation config: same budget, no mask training terms."""
    return dataclasses.replace(config, edge_l1=0.0, weight_l1=0.0)


def evaluate_ticket(graph, params, edge_alive, weight_mask, config, task):
    """Isolated retrain: rewind, physically remove pruned edges, train with
    the weight mask frozen, report best-val metrics."""
    params.rewind()
    mask = EdgeMask(edge_alive.astype(np.float32), edge_alive)
    pruned = remove_pruned_edges(graph, mask)
    result = train_model(pruned, params, retrain_config(config), task,
                         weight_mask=weight_mask)
    return result


def _macs(graph, edge_alive, weight_mask, params):
    dims = [(params.in_dim, params.hidden_dim),
            (params.hidden_dim, params.out_dim)]
    mask = EdgeMask(edge_alive.astype(np.float32), edge_alive)
    return macs_for_model(graph.num_nodes, mask, weight_mask, dims).total


def find_glt(graph, params, config, task, log_fh=None):
    """Iterative rounds of mask training, thresholding, rewinding, and edge
    removal until both sparsity targets are met (or max_rounds / an empty
    graph stops the search). Every round's ticket is retrained in isolation.
    """
    snapshot_hash = params.state_hash(snapshot=True)
    total_edges = graph.num_edges
    cum_edge_alive = np.ones(total_edges, dtype=bool)
    weight_mask = WeightMask.ones(params)

    t0 = time.perf_counter()
    params.rewind()
    dense = train_model(graph, params, retrain_config(config.round), task,
                        log_fh=log_fh)
    records = [RoundRecord(
        round=0, graph_sparsity=0.0, weight_sparsity=0.0,
        macs=_macs(graph, cum_edge_alive, weight_mask, params),
        val_metric=dense.best_val, test_metric=dense.test_at_best,
        round_val=dense.best_val, round_test=dense.test_at_best,
        wall_seconds=time.perf_counter() - t0,
        edge_alive=cum_edge_alive.copy(),
        weight_alive=[a.copy() for a in weight_mask.alive],
    )]

    carry_edge = None  # trained continuous values, only in carry mode
    carry_weight = None
    for round_idx in range(1, config.max_rounds + 1):
        done_graph = graph_sparsity_of(cum_edge_alive) >= config.target_graph_sparsity
        done_weight = weight_mask.sparsity() >= config.target_weight_sparsity
        if done_graph and done_weight:
            break
        if not cum_edge_alive.any():
            break  # every edge pruned; nothing left to sparsify

        t0 = time.perf_counter()
        cum_mask = EdgeMask(cum_edge_alive.astype(np.float32), cum_edge_alive)
        pruned = remove_pruned_edges(graph, cum_mask)
        local_alive = np.ones(pruned.num_edges, dtype=bool)
        if config.round.carry_mask_values and carry_edge is not None:
            local_values = carry_edge[cum_edge_alive].astype(np.float32)
        else:
            local_values = np.ones(pruned.num_edges, dtype=np.float32)
        edge_mask = EdgeMask(local_values, local_alive)
        if config.round.carry_mask_values and carry_weight is not None:
            round_weight = WeightMask(
                [v * a for v, a in zip(carry_weight, weight_mask.alive)],
                weight_mask.alive,
            )
        else:
            round_weight = WeightMask(
                [a.astype(np.float32) for a in weight_mask.alive],
                weight_mask.alive,
            )

        params.rewind()
        round_result = ugs_round(pruned, params, edge_mask, round_weight,
                                 config.round, task, log_fh=log_fh)
        new_edge, new_weight = threshold_masks(
            round_result, config.round.edge_prune_frac,
            config.round.weight_prune_frac,
        )
        carry_edge_full = np.zeros(total_edges, dtype=np.float32)
        carry_edge_full[cum_edge_alive] = round_result.final_edge_values
        carry_edge = carry_edge_full
        carry_weight = round_result.final_weight_values

        # fold the round-local kill set back into original edge slots
        orig_idx = np.flatnonzero(cum_edge_alive)
        cum_edge_alive = cum_edge_alive.copy()
        cum_edge_alive[orig_idx[~new_edge.alive]] = False
        weight_mask = new_weight

        params.rewind()
        assert params.state_hash() == snapshot_hash, "rewind failed"
        ticket = evaluate_ticket(graph, params, cum_edge_alive, weight_mask,
                                 config.round, task)
        records.append(RoundRecord(
            round=round_idx,
            graph_sparsity=graph_sparsity_of(cum_edge_alive),
            weight_sparsity=weight_mask.sparsity(),
            macs=_macs(graph, cum_edge_alive, weight_mask, params),
            val_metric=ticket.best_val, test_metric=ticket.test_at_best,
            round_val=round_result.best_val, round_test=round_result.test_at_best,
            wall_seconds=time.perf_counter() - t0,
            edge_alive=cum_edge_alive.copy(),
            weight_alive=[a.copy() for a in weight_mask.alive],
        ))

    final_edge = EdgeMask(cum_edge_alive.astype(np.float32), cum_edge_alive)
    return TicketReport(records=records, edge_mask=final_edge,
                        weight_mask=weight_mask, snapshot_hash=snapshot_hash)


def graph_sparsity_of(alive):
    return 1.0 - float(alive.sum()) / alive.size


def prune_schedule(total, frac, rounds):
    """Alive counts after each round of floor(frac * alive) kills (min 1)."""
    alive = int(total)
    out = []
    for _ in range(rounds):
        if alive > 0:
            cut = min(max(int(frac * alive), 1), alive)
            alive -= cut
        out.append(alive)
    return out


def random_prune(edge_mask, weight_mask, graph_target, weight_target, seed):
    """Uniformly random alive subsets at the requested sparsities.

    Kill counts use floor(target * total); subsets are drawn from the
    currently-alive slots so the result matches the masks' monotone-death
    contract.
    """
    if not (0 <= graph_target < 1 and 0 <= weight_target < 1):
        raise ValueError("sparsity targets must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    kill_e = int(graph_target * edge_mask.num_slots + 1e-9)
    kill_w = int(weight_target * weight_mask.total() + 1e-9)
    return random_prune_counts(
        edge_mask, weight_mask,
        edge_mask.alive_count() - kill_e,
        weight_mask.alive_count() - kill_w,
        rng,
    )


def random_prune_counts(edge_mask, weight_mask, alive_edges, alive_weights, rng):
    """Random masks with exact alive counts (used for matched-sparsity sweeps)."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    e_idx = np.flatnonzero(edge_mask.alive)
    if not 0 <= alive_edges <= e_idx.size:
        raise ValueError("edge target exceeds alive count")
    keep_e = rng.choice(e_idx, size=alive_edges, replace=False)
    new_e_alive = np.zeros(edge_mask.num_slots, dtype=bool)
    new_e_alive[keep_e] = True
    new_edge = EdgeMask(new_e_alive.astype(np.float32), new_e_alive)

    flat_alive = weight_mask.ravel_alive()
    w_idx = np.flatnonzero(flat_alive)
    if not 0 <= alive_weights <= w_idx.size:
        raise ValueError("weight target exceeds alive count")
    keep_w = rng.choice(w_idx, size=alive_weights, replace=False)
    new_w_flat = np.zeros(flat_alive.size, dtype=bool)
    new_w_flat[keep_w] = True
    new_weight = weight_mask.with_flat(new_w_flat.astype(np.float32), new_w_flat)
    return new_edge, new_weight


def random_reinit_ticket(graph, task, report, config, seed):
    """Keep the found masks, replace the initialization with a fresh draw,
    retrain with masks frozen, and report the metrics."""
    record = report.final()
    template = report.weight_mask
    dims = [v.shape for v in template.values]
    fresh = init_params(dims[0][0], dims[0][1], dims[1][1], seed=seed)
    result = evaluate_ticket(graph, fresh, record.edge_alive, template,
                             config.round, task)
    return result


def random_ticket(graph, params, task, config, alive_edges, alive_weights, seed):
    """Random-pruning baseline at exact counts: random masks, same rewind
    snapshot, same isolated-retrain protocol as real tickets."""
    edge_mask = EdgeMask.ones(graph.num_edges)
    weight_mask = WeightMask.ones(params)
    new_edge, new_weight = random_prune_counts(
        edge_mask, weight_mask, alive_edges, alive_weights, seed
    )
    result = evaluate_ticket(graph, params, new_edge.alive, new_weight,
                             config.round, task)
    return result, new_edge, new_weight


def random_glt_baseline(graph, params, task, report, config, seed):
    """Fully randomized ticket: random masks at the found ticket's exact
    sparsities plus a fresh initialization (weights and masks both
    re-randomized), retrained frozen."""
    record = report.final()
    template = report.weight_mask
    dims = [v.shape for v in template.values]
    fresh = init_params(dims[0][0], dims[0][1], dims[1][1], seed=seed)
    result, _, _ = random_ticket(
        graph, fresh, task, config,
        int(record.edge_alive.sum()),
        int(sum(a.sum() for a in record.weight_alive)),
        seed,
    )
    return result
