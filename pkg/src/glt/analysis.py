"""Task metrics, inference MACs accounting, and graph measurements."""

from dataclasses import dataclass

import numpy as np

from glt import kernels


def accuracy(logits, labels, index_set):
    """Argmax-match fraction over index_set; argmax ties go to the lowest class."""
    index_set = np.asarray(index_set, dtype=np.int64).reshape(-1)
    if index_set.size == 0:
        raise ValueError("accuracy over an empty index set")
    pred = np.argmax(np.asarray(logits)[index_set], axis=1)
    return float(np.mean(pred == np.asarray(labels)[index_set]))


def roc_auc(scores, binary_labels):
    """Rank-based AUC: P(random positive outranks random negative), ties 1/2."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(binary_labels).reshape(-1).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs at least one positive and one negative")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(labels.size, dtype=np.float64)
    sorted_scores = scores[order]
    # midranks for tied scores
    i = 0
    while i < labels.size:
        j = i
        while j + 1 < labels.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = ranks[labels].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class MacsReport:
    """Multiply-accumulate counts of one inference pass (MACs = FLOPs/2)."""

    aggregation: int
    transform: int
    per_layer: list  # [(aggregation, transform)] per layer

    @property
    def total(self):
        return self.aggregation + self.transform


def macs_count(num_nodes, alive_edges, alive_weights_per_layer, layer_dims):
    """Analytic MACs: per layer, aggregation costs nnz(masked adjacency
    including self-loops and both symmetric entries) x F_in, and the dense
    transform costs |V| x alive-weight-count."""
    nnz = 2 * int(alive_edges) + num_nodes
    per_layer = []
    for (f_in, _f_out), alive_w in zip(layer_dims, alive_weights_per_layer):
        agg = nnz * f_in
        trans = num_nodes * int(alive_w)
        per_layer.append((agg, trans))
    return MacsReport(
        aggregation=sum(a for a, _ in per_layer),
        transform=sum(t for _, t in per_layer),
        per_layer=per_layer,
    )


def macs_for_model(graph_or_nodes, edge_mask, weight_mask, layer_dims):
    """macs_count wired to the domain objects (mask alive counts)."""
    num_nodes = getattr(graph_or_nodes, "num_nodes", graph_or_nodes)
    alive_edges = edge_mask.alive_count()
    alive_w = [int(a.sum()) for a in weight_mask.alive]
    return macs_count(num_nodes, alive_edges, alive_w, layer_dims)


def avg_clustering(graph):
    """Mean over nodes of 2T(v) / (d_v (d_v - 1)); 0 where degree < 2."""
    n = graph.num_nodes
    if n == 0:
        return 0.0
    nbrs = graph.neighbor_sets()
    total = 0.0
    for v in range(n):
        d = len(nbrs[v])
        if d < 2:
            continue
        links = sum(len(nbrs[v] & nbrs[u]) for u in nbrs[v])  # 2 * triangles(v)
        total += links / (d * (d - 1))
    return total / n


def _brandes_raw(graph):
    return kernels.brandes(
        graph.csr.indptr, graph.csr.indices, graph.csr.entry_slot, graph.num_edges
    )


def node_betweenness(graph):
    """Exact betweenness per node, analysis-library normalization
    2/((n-1)(n-2)); all zeros when n < 3."""
    n = graph.num_nodes
    node_acc, _ = _brandes_raw(graph)
    if n < 3:
        return np.zeros(n, dtype=np.float64)
    # accumulation counts each unordered pair twice
    return node_acc / ((n - 1) * (n - 2))


def edge_betweenness(graph):
    """Exact betweenness per undirected edge, normalization 2/(n(n-1))."""
    n = graph.num_nodes
    _, edge_acc = _brandes_raw(graph)
    if n < 2:
        return np.zeros(graph.num_edges, dtype=np.float64)
    return edge_acc / (n * (n - 1))


@dataclass
class GraphMeasures:
    avg_clustering: float
    avg_node_betweenness: float
    avg_edge_betweenness: float


def measure_graph(graph):
    """The three comparison measures, averaged over all nodes/edges."""
    node_acc, edge_acc = _brandes_raw(graph)
    n = graph.num_nodes
    nb = node_acc / ((n - 1) * (n - 2)) if n >= 3 else np.zeros(n)
    eb = edge_acc / (n * (n - 1)) if n >= 2 else edge_acc
    return GraphMeasures(
        avg_clustering=float(avg_clustering(graph)),
        avg_node_betweenness=float(nb.mean()) if n else 0.0,
        avg_edge_betweenness=float(eb.mean()) if graph.num_edges else 0.0,
    )
