"""Graph representation, degree normalization, edge masking, and pruning.

Graphs are undirected and immutable: the edge list stores each edge once as
(i, j) with i < j, and the CSR view is its symmetrization. Self-loops are
never part of the edge list; normalization adds them implicitly.
"""

from dataclasses import dataclass, field

import numpy as np


class ContractViolation(ValueError):
    """Inputs break a documented precondition."""


def _readonly(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Csr:
    """Symmetrized CSR view; entry_slot maps each stored entry to its
    undirected edge index (-1 for diagonal entries, which only the
    normalized matrix has)."""

    indptr: np.ndarray  # int64 [n+1]
    indices: np.ndarray  # int32 [nnz]
    entry_slot: np.ndarray  # int32 [nnz]

    @property
    def num_nodes(self):
        return self.indptr.shape[0] - 1

    @property
    def nnz(self):
        return self.indices.shape[0]

    def rows(self):
        return np.repeat(
            np.arange(self.num_nodes, dtype=np.int32), np.diff(self.indptr)
        )


def _build_csr(num_nodes, rows, cols, slots):
    order = np.lexsort((cols, rows))
    rows, cols, slots = rows[order], cols[order], slots[order]
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    return Csr(
        indptr=_readonly(indptr),
        indices=_readonly(cols.astype(np.int32)),
        entry_slot=_readonly(slots.astype(np.int32)),
    )


class Graph:
    """Undirected attributed graph with optional node labels (-1 = unlabeled)."""

    def __init__(self, num_nodes, features, edges, labels=None):
        features = np.asarray(features, dtype=np.float32)
        edges = np.asarray(edges, dtype=np.int32).reshape(-1, 2)
        if labels is None:
            labels = np.full(num_nodes, -1, dtype=np.int32)
        labels = np.asarray(labels, dtype=np.int32)
        if features.ndim != 2 or features.shape[0] != num_nodes:
            raise ContractViolation(
                f"features must be [{num_nodes} x F], got {features.shape}"
            )
        if labels.shape != (num_nodes,):
            raise ContractViolation(f"labels must have shape ({num_nodes},)")
        if edges.size:
            if edges.min() < 0 or edges.max() >= num_nodes:
                raise ContractViolation("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ContractViolation("edges must satisfy i < j (no self-loops)")
            keys = edges[:, 0].astype(np.int64) * num_nodes + edges[:, 1]
            if np.unique(keys).shape[0] != edges.shape[0]:
                raise ContractViolation("duplicate edges")
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
        self.num_nodes = int(num_nodes)
        self.features = _readonly(features)
        self.edges = _readonly(edges)
        self.labels = _readonly(labels)
        self.csr = self._symmetrize()

    def _symmetrize(self):
        e = self.edges
        slots = np.arange(e.shape[0], dtype=np.int32)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return _build_csr(self.num_nodes, rows, cols, np.concatenate([slots, slots]))

    @property
    def num_edges(self):
        return self.edges.shape[0]

    @property
    def feature_dim(self):
        return self.features.shape[1]

    def degrees(self):
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        if self.num_edges:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def neighbor_sets(self):
        return [
            set(self.csr.indices[self.csr.indptr[i]: self.csr.indptr[i + 1]].tolist())
            for i in range(self.num_nodes)
        ]


@dataclass
class EdgeMask:
    """One scalar per undirected edge; dead slots are pinned to zero."""

    values: np.ndarray  # float32 [E]
    alive: np.ndarray  # bool [E]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32).reshape(-1)
        self.alive = np.asarray(self.alive, dtype=bool).reshape(-1)
        if self.values.shape != self.alive.shape:
            raise ContractViolation("mask values/alive length mismatch")
        if np.any(self.values[~self.alive] != 0.0):
            raise ContractViolation("dead mask slots must hold 0")

    @classmethod
    def ones(cls, num_edges):
        return cls(np.ones(num_edges, dtype=np.float32), np.ones(num_edges, dtype=bool))

    @property
    def num_slots(self):
        return self.values.shape[0]

    def alive_count(self):
        return int(self.alive.sum())


@dataclass(frozen=True)
class NormAdjacency:
    """Degree-normalized adjacency with self-loops, as symmetric CSR."""

    csr: Csr
    data: np.ndarray = field(repr=False)  # float32 [nnz]

    @property
    def num_nodes(self):
        return self.csr.num_nodes

    @property
    def num_edges(self):
        return int(self.csr.entry_slot.max(initial=-1)) + 1

    def dense(self):
        out = np.zeros((self.num_nodes, self.num_nodes), dtype=np.float32)
        out[self.csr.rows(), self.csr.indices] = self.data
        return out


@dataclass
class MaskedAdjacency:
    """apply_edge_mask output: normalized adjacency with off-diagonal entries
    scaled by the mask; `mask` keeps the differentiable handle when the mask
    came from the tape."""

    norm: NormAdjacency
    data: np.ndarray
    mask: object = None  # Tensor or None

    @property
    def csr(self):
        return self.norm.csr


def normalize_adjacency(graph):
    """Symmetric degree normalization of adjacency-plus-self-loops.

    With d_i = degree(i) + 1: entry (i, j) holds (d_i d_j)^(-1/2) and the
    diagonal holds 1/d_i. Isolated nodes keep a unit self-loop.
    """
    n = graph.num_nodes
    d = (graph.degrees() + 1).astype(np.float64)
    e = graph.edges
    slots = np.arange(e.shape[0], dtype=np.int32)
    rows = np.concatenate([e[:, 0], e[:, 1], np.arange(n, dtype=np.int32)])
    cols = np.concatenate([e[:, 1], e[:, 0], np.arange(n, dtype=np.int32)])
    all_slots = np.concatenate(
        [slots, slots, np.full(n, -1, dtype=np.int32)]
    )
    inv_sqrt = 1.0 / np.sqrt(d)
    csr = _build_csr(n, rows.astype(np.int64), cols.astype(np.int64), all_slots)
    csr_rows = csr.rows()
    data = (inv_sqrt[csr_rows] * inv_sqrt[csr.indices]).astype(np.float32)
    return NormAdjacency(csr=csr, data=_readonly(data))


def _mask_values(mask):
    if isinstance(mask, EdgeMask):
        return mask.values, None
    if hasattr(mask, "data") and hasattr(mask, "requires_grad"):  # tape Tensor
        return mask.data.reshape(-1), mask
    return np.asarray(mask, dtype=np.float32).reshape(-1), None


def apply_edge_mask(norm, mask):
    """Scale off-diagonal entries by their edge's mask value; diagonal is
    never masked. Gradients w.r.t. a Tensor mask flow through spmm."""
    values, tensor = _mask_values(mask)
    if values.shape[0] != norm.num_edges:
        raise ContractViolation(
            f"mask has {values.shape[0]} slots, adjacency has {norm.num_edges} edges"
        )
    slot = norm.csr.entry_slot
    data = norm.data.astype(np.result_type(norm.data, values))
    off = slot >= 0
    data[off] = data[off] * values[slot[off]]
    return MaskedAdjacency(norm=norm, data=data, mask=tensor)


def remove_pruned_edges(graph, mask):
    """New graph containing exactly the mask's alive edges; features, labels
    and node count are untouched."""
    if mask.num_slots != graph.num_edges:
        raise ContractViolation("mask length does not match graph edge count")
    return Graph(
        graph.num_nodes,
        graph.features,
        graph.edges[mask.alive],
        graph.labels,
    )


def graph_sparsity(mask):
    """Fraction of permanently pruned edge slots."""
    if mask.num_slots == 0:
        raise ContractViolation("empty edge mask")
    return 1.0 - mask.alive_count() / mask.num_slots
