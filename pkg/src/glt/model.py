"""Two-layer GCN with optional edge/weight masks and a rewind snapshot."""

import hashlib
from dataclasses import dataclass

import numpy as np

from glt.graphs import apply_edge_mask, normalize_adjacency
from glt.tape import Tape, Tensor


class GcnParams:
    """Layer weights plus row biases; `snapshot` freezes the initial values
    so training can be rewound."""

    def __init__(self, theta0, theta1, bias0=None, bias1=None):
        self.theta0 = Tensor(theta0, requires_grad=True)
        self.theta1 = Tensor(theta1, requires_grad=True)
        self.use_bias = bias0 is not None
        if self.use_bias:
            self.bias0 = Tensor(bias0, requires_grad=True)
            self.bias1 = Tensor(bias1, requires_grad=True)
        self.snapshot = {k: t.data.copy() for k, t in self.named_tensors()}
        for arr in self.snapshot.values():
            arr.setflags(write=False)

    def named_tensors(self):
        items = [("theta0", self.theta0), ("theta1", self.theta1)]
        if self.use_bias:
            items += [("bias0", self.bias0), ("bias1", self.bias1)]
        return items

    def tensors(self):
        return [t for _, t in self.named_tensors()]

    def weights(self):
        return [self.theta0, self.theta1]

    @property
    def in_dim(self):
        return self.theta0.shape[0]

    @property
    def hidden_dim(self):
        return self.theta0.shape[1]

    @property
    def out_dim(self):
        return self.theta1.shape[1]

    def rewind(self):
        """Restore every tensor to its snapshot, bit for bit."""
        for name, t in self.named_tensors():
            np.copyto(t.data, self.snapshot[name])

    def load(self, state):
        for name, t in self.named_tensors():
            np.copyto(t.data, state[name])

    def state(self):
        return {name: t.data.copy() for name, t in self.named_tensors()}

    def state_hash(self, snapshot=False):
        h = hashlib.sha256()
        for name, t in self.named_tensors():
            h.update(self.snapshot[name].tobytes() if snapshot else t.data.tobytes())
        return h.hexdigest()


def init_params(in_dim, hidden_dim, out_dim, seed, bias=True):
    """Glorot-uniform weights, zero biases, snapshot captured."""
    for d in (in_dim, hidden_dim, out_dim):
        if d <= 0:
            raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed)

    def glorot(fan_in, fan_out):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-a, a, size=(fan_in, fan_out)).astype(np.float32)

    theta0 = glorot(in_dim, hidden_dim)
    theta1 = glorot(hidden_dim, out_dim)
    if bias:
        b0 = np.zeros((1, hidden_dim), dtype=np.float32)
        b1 = np.zeros((1, out_dim), dtype=np.float32)
        return GcnParams(theta0, theta1, b0, b1)
    return GcnParams(theta0, theta1)


@dataclass
class WeightMask:
    """Per-weight-tensor mask arrays aligned with [theta0, theta1]; biases
    are never masked and never counted."""

    values: list
    alive: list

    def __post_init__(self):
        self.values = [np.asarray(v, dtype=np.float32) for v in self.values]
        self.alive = [np.asarray(a, dtype=bool) for a in self.alive]
        for v, a in zip(self.values, self.alive):
            if v.shape != a.shape:
                raise ValueError("weight mask values/alive shape mismatch")
            if np.any(v[~a] != 0.0):
                raise ValueError("dead weight-mask slots must hold 0")

    @classmethod
    def ones(cls, params):
        shapes = [t.shape for t in params.weights()]
        return cls(
            [np.ones(s, dtype=np.float32) for s in shapes],
            [np.ones(s, dtype=bool) for s in shapes],
        )

    def total(self):
        return sum(v.size for v in self.values)

    def alive_count(self):
        return int(sum(a.sum() for a in self.alive))

    def sparsity(self):
        return 1.0 - self.alive_count() / self.total()

    def ravel_values(self):
        return np.concatenate([v.ravel() for v in self.values])

    def ravel_alive(self):
        return np.concatenate([a.ravel() for a in self.alive])

    def with_flat(self, flat_values, flat_alive):
        """Rebuild per-tensor arrays from flat (global slot order) arrays."""
        values, alive, at = [], [], 0
        for v in self.values:
            n = v.size
            values.append(flat_values[at:at + n].reshape(v.shape).astype(np.float32))
            alive.append(flat_alive[at:at + n].reshape(v.shape))
            at += n
        return WeightMask(values, alive)

    def copy(self):
        return WeightMask([v.copy() for v in self.values], [a.copy() for a in self.alive])


def forward(adj, x, params, tape, weight_masks=None):
    """Logits of the two-layer GCN: aggregate(act(aggregate(x @ W0)) @ W1).

    `adj` is a NormAdjacency or MaskedAdjacency; `weight_masks` an optional
    [m0, m1] pair of tensors multiplied elementwise into the weights. Raw
    logits are returned; softmax lives in the loss.
    """
    w0, w1 = params.theta0, params.theta1
    if weight_masks is not None:
        w0 = tape.mul(w0, weight_masks[0])
        w1 = tape.mul(w1, weight_masks[1])
    h = tape.matmul(x, w0)
    h = tape.spmm(adj, h)
    if params.use_bias:
        h = tape.add_bias(h, params.bias0)
    h = tape.relu(h)
    z = tape.matmul(h, w1)
    z = tape.spmm(adj, z)
    if params.use_bias:
        z = tape.add_bias(z, params.bias1)
    return z


def embed(adj, x, params, tape, weight_masks=None):
    """Same pipeline as forward; the final width is an embedding dimension."""
    return forward(adj, x, params, tape, weight_masks)


def link_score(embeddings, pairs):
    """Inner-product link scores (raw, pre-sigmoid); symmetric in (u, v)."""
    embeddings = np.asarray(embeddings)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size and (pairs.min() < 0 or pairs.max() >= embeddings.shape[0]):
        raise IndexError("pair index out of range")
    scores = np.einsum(
        "pf,pf->p",
        embeddings[pairs[:, 0]].astype(np.float64),
        embeddings[pairs[:, 1]].astype(np.float64),
    )
    return scores.astype(embeddings.dtype)


def predict(graph, params, edge_mask=None, weight_mask=None):
    """Numpy logits for evaluation: builds the normalized adjacency, applies
    masks as constants, and runs forward on a throwaway tape."""
    norm = normalize_adjacency(graph)
    adj = norm if edge_mask is None else apply_edge_mask(norm, edge_mask)
    tape = Tape()
    x = Tensor(graph.features)
    wm = None
    if weight_mask is not None:
        wm = [Tensor(v) for v in weight_mask.values]
    out = forward(adj, x, params, tape, wm)
    return out.data.copy()
