"""One joint-sparsification round: co-train weights and both masks under the
l1-regularized task loss, track the best-validation checkpoint, then
magnitude-threshold the masks.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from glt.analysis import accuracy, roc_auc
from glt.graphs import EdgeMask, apply_edge_mask, normalize_adjacency
from glt.model import WeightMask, forward, link_score
from glt.optim import Adam
from glt.tape import Tape, Tensor


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class RoundConfig:
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
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0 < self.edge_prune_frac < 1 and 0 < self.weight_prune_frac < 1):
            raise ValueError("prune fractions must lie in (0, 1)")
        for name in ("lr", "mask_lr_edge", "mask_lr_weight"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.edge_l1 < 0 or self.weight_l1 < 0 or self.weight_decay < 0:
            raise ValueError("l1/weight-decay coefficients must be non-negative")


class NodeTask:
    """Transductive node classification; metric = accuracy."""

    metric_name = "accuracy"

    def __init__(self, labels, train_nodes, val_nodes, test_nodes):
        self.labels = np.asarray(labels, dtype=np.int64)
        self.train_nodes = np.asarray(train_nodes, dtype=np.int64)
        self.val_nodes = np.asarray(val_nodes, dtype=np.int64)
        self.test_nodes = np.asarray(test_nodes, dtype=np.int64)

    @property
    def out_dim(self):
        return int(self.labels.max()) + 1

    def loss(self, tape, out, rng=None):
        return tape.softmax_cross_entropy(out, self.labels, self.train_nodes)

    def metrics(self, out_np):
        return (
            accuracy(out_np, self.labels, self.val_nodes),
            accuracy(out_np, self.labels, self.test_nodes),
        )


class LinkTask:
    """Link prediction with an inner-product decoder; metric = ROC-AUC.

    Training pairs one uniformly resampled negative with every positive per
    iteration; evaluation scores the fixed val/test positives and negatives.
    """

    metric_name = "roc_auc"

    def __init__(self, splits, num_nodes, embed_dim=16):
        self.num_nodes = num_nodes
        self.embed_dim = embed_dim
        self.train_edges = np.asarray(splits.train_edges, dtype=np.int64)
        self.val_pairs = np.concatenate([splits.val_edges, splits.val_neg])
        self.val_labels = np.concatenate(
            [np.ones(len(splits.val_edges)), np.zeros(len(splits.val_neg))]
        )
        self.test_pairs = np.concatenate([splits.test_edges, splits.test_neg])
        self.test_labels = np.concatenate(
            [np.ones(len(splits.test_edges)), np.zeros(len(splits.test_neg))]
        )
        n = num_nodes
        e = self.train_edges
        self._train_keys = np.unique(
            np.minimum(e[:, 0], e[:, 1]) * n + np.maximum(e[:, 0], e[:, 1])
        )

    @property
    def out_dim(self):
        return self.embed_dim

    def _sample_negatives(self, rng, count):
        out = np.empty((0, 2), dtype=np.int64)
        n = self.num_nodes
        while out.shape[0] < count:
            cand = rng.integers(0, n, size=(2 * count, 2))
            cand = cand[cand[:, 0] != cand[:, 1]]
            keys = np.minimum(cand[:, 0], cand[:, 1]) * n + np.maximum(
                cand[:, 0], cand[:, 1]
            )
            cand = cand[~np.isin(keys, self._train_keys)]
            out = np.concatenate([out, cand])
        return out[:count]

    def loss(self, tape, emb, rng):
        pos = self.train_edges
        neg = self._sample_negatives(rng, pos.shape[0])
        pairs = np.concatenate([pos, neg])
        targets = np.concatenate([np.ones(pos.shape[0]), np.zeros(neg.shape[0])])
        scores = tape.pair_dot(emb, pairs)
        return tape.sigmoid_bce(scores, targets)

    def metrics(self, emb_np):
        return (
            roc_auc(link_score(emb_np, self.val_pairs), self.val_labels),
            roc_auc(link_score(emb_np, self.test_pairs), self.test_labels),
        )


@dataclass
class TrainResult:
    """Best-validation checkpoint of one training run."""

    params_state: dict
    best_val: float
    best_iter: int
    test_at_best: float
    history: list = field(repr=False, default_factory=list)


@dataclass
class RoundResult(TrainResult):
    """TrainResult plus the continuous (pre-threshold) masks.

    `edge_values`/`weight_values` come from the best-validation iteration
    (the round's reported checkpoint); `final_edge_values`/
    `final_weight_values` are the last-iteration masks, which is what
    magnitude thresholding consumes."""

    edge_values: np.ndarray = None
    edge_alive: np.ndarray = None
    weight_values: list = None
    weight_alive: list = None
    final_edge_values: np.ndarray = None
    final_weight_values: list = None


def _mean_abs_alive(values, alive):
    alive_vals = values.reshape(-1)[alive.reshape(-1)]
    return float(np.abs(alive_vals).mean()) if alive_vals.size else 0.0


def _log_record(log_fh, rec):
    if log_fh is not None:
        log_fh.write(json.dumps(rec) + "\n")


def ugs_round(graph, params, edge_mask, weight_mask, config, task,
              train_masks=True, log_fh=None):
    """Run one sparsification round and return its best-val checkpoint.

    Normalization is computed once from the graph's (alive) edges; the
    continuous edge mask scales normalized entries during the round.
    """
    norm = normalize_adjacency(graph)
    x = Tensor(graph.features)
    edge_t = Tensor(edge_mask.values, requires_grad=train_masks)
    wm_t = [Tensor(v, requires_grad=train_masks) for v in weight_mask.values]

    opt_w = Adam(
        params.weights(), config.lr, weight_decay=config.weight_decay,
        frozen=[~a for a in weight_mask.alive],
    )
    opts = [opt_w]
    if params.use_bias:
        opts.append(Adam([params.bias0, params.bias1], config.lr))
    if train_masks:
        opts.append(Adam([edge_t], config.mask_lr_edge,
                         frozen=[~edge_mask.alive]))
        opts.append(Adam(wm_t, config.mask_lr_weight,
                         frozen=[~a for a in weight_mask.alive]))

    rng = np.random.default_rng(config.seed)
    tape = Tape()
    best = RoundResult(params_state=None, best_val=-np.inf, best_iter=-1,
                       test_at_best=np.nan)
    history = []
    for it in range(config.iterations):
        tape.reset()
        try:
            masked = apply_edge_mask(norm, edge_t)
            out = forward(masked, x, params, tape, wm_t)
            loss = task.loss(tape, out, rng)
            if train_masks and config.edge_l1 > 0:
                loss = tape.scalar_add(
                    loss, tape.scalar_scale(tape.l1_penalty(edge_t), config.edge_l1)
                )
            if train_masks and config.weight_l1 > 0:
                l1 = tape.l1_penalty(wm_t[0])
                for m in wm_t[1:]:
                    l1 = tape.scalar_add(l1, tape.l1_penalty(m))
                loss = tape.scalar_add(loss, tape.scalar_scale(l1, config.weight_l1))
            tape.backward(loss)
        except FloatingPointError as exc:
            raise TrainingDiverged(f"iteration {it}: {exc}") from exc
        for opt in opts:
            opt.step()
        val, test = task.metrics(out.data)
        rec = {
            "iteration": it,
            "loss": loss.item(),
            "val_metric": val,
            "test_metric": test,
            "mean_abs_edge_mask": _mean_abs_alive(edge_t.data, edge_mask.alive),
            "mean_abs_weight_mask": _mean_abs_alive(
                np.concatenate([m.data.ravel() for m in wm_t]),
                weight_mask.ravel_alive(),
            ),
        }
        history.append(rec)
        _log_record(log_fh, rec)
        if val > best.best_val:
            best.best_val = val
            best.best_iter = it
            best.test_at_best = test
            best.params_state = params.state()
            best.edge_values = edge_t.data.reshape(-1).copy()
            best.weight_values = [m.data.copy() for m in wm_t]
    best.edge_alive = edge_mask.alive.copy()
    best.weight_alive = [a.copy() for a in weight_mask.alive]
    best.final_edge_values = edge_t.data.reshape(-1).copy()
    best.final_weight_values = [m.data.copy() for m in wm_t]
    best.history = history
    return best


def train_model(graph, params, config, task, weight_mask=None, edge_mask=None,
                log_fh=None):
    """Plain trainer (no mask machinery): optional constant binary masks,
    weight decay on the layer weights only, best-val checkpointing."""
    norm = normalize_adjacency(graph)
    adj = norm if edge_mask is None else apply_edge_mask(norm, edge_mask)
    x = Tensor(graph.features)
    wm_t = None
    frozen = None
    if weight_mask is not None:
        wm_t = [Tensor(v) for v in weight_mask.values]
        frozen = [~a for a in weight_mask.alive]
    opt_w = Adam(params.weights(), config.lr, weight_decay=config.weight_decay,
                 frozen=frozen)
    opts = [opt_w]
    if params.use_bias:
        opts.append(Adam([params.bias0, params.bias1], config.lr))
    rng = np.random.default_rng(config.seed)
    tape = Tape()
    best = TrainResult(params_state=None, best_val=-np.inf, best_iter=-1,
                       test_at_best=np.nan)
    history = []
    for it in range(config.iterations):
        tape.reset()
        try:
            out = forward(adj, x, params, tape, wm_t)
            loss = task.loss(tape, out, rng)
            tape.backward(loss)
        except FloatingPointError as exc:
            raise TrainingDiverged(f"iteration {it}: {exc}") from exc
        for opt in opts:
            opt.step()
        val, test = task.metrics(out.data)
        rec = {"iteration": it, "loss": loss.item(), "val_metric": val,
               "test_metric": test}
        history.append(rec)
        _log_record(log_fh, rec)
        if val > best.best_val:
            best.best_val = val
            best.best_iter = it
            best.test_at_best = test
            best.params_state = params.state()
    best.history = history
    return best


def prune_smallest(values, alive, frac):
    """New alive array with the floor(frac * alive) smallest-|value| alive
    slots killed (at least one while any are alive); ties break by slot index."""
    values = np.asarray(values).reshape(-1)
    alive = np.asarray(alive, dtype=bool).reshape(-1)
    alive_idx = np.flatnonzero(alive)
    if alive_idx.size == 0:
        return alive.copy()
    k = int(frac * alive_idx.size)
    k = min(max(k, 1), alive_idx.size)
    order = np.argsort(np.abs(values[alive_idx]), kind="stable")
    out = alive.copy()
    out[alive_idx[order[:k]]] = False
    return out


def threshold_masks(result, edge_prune_frac, weight_prune_frac):
    """Magnitude-threshold the round's final-iteration masks into binary
    masks. Survivors are re-armed to 1; weight slots are ranked globally
    across layer tensors (theta0 then theta1 order).
    """
    edge_alive = prune_smallest(result.final_edge_values, result.edge_alive,
                                edge_prune_frac)
    edge = EdgeMask(edge_alive.astype(np.float32), edge_alive)

    wm = WeightMask(
        [v * a for v, a in zip(result.final_weight_values, result.weight_alive)],
        result.weight_alive,
    )
    flat_alive = prune_smallest(
        np.concatenate([v.ravel() for v in result.final_weight_values]),
        wm.ravel_alive(), weight_prune_frac,
    )
    weight = wm.with_flat(flat_alive.astype(np.float32), flat_alive)
    return edge, weight
