"""Shared test fixtures and independent oracles (finite differences,
shortest-path enumeration, literal MAC counting)."""

import numpy as np

from glt.graphs import Graph


def random_graph(n, p, seed, feature_dim=3):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    feats = rng.normal(size=(n, feature_dim)).astype(np.float32)
    labels = rng.integers(0, 3, size=n).astype(np.int32)
    return Graph(n, feats, edges, labels)


def path_graph(n, feature_dim=2):
    edges = [(i, i + 1) for i in range(n - 1)]
    return Graph(n, np.zeros((n, feature_dim), np.float32), edges)


def complete_graph(n, feature_dim=2):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph(n, np.zeros((n, feature_dim), np.float32), edges)


# ---- finite differences ----

def finite_diff_grads(loss_fn, leaves, h=1e-3):
    """Central differences of loss_fn() w.r.t. each float64 leaf tensor.

    loss_fn must rebuild the forward pass from the leaves' current data and
    return the scalar loss value (a float).
    """
    grads = []
    for leaf in leaves:
        g = np.zeros_like(leaf.data)
        flat = leaf.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn()
            flat[i] = orig - h
            down = loss_fn()
            flat[i] = orig
            g.reshape(-1)[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def max_rel_err(analytic, numeric):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    return float(
        (np.abs(analytic - numeric) / (np.abs(numeric) + 1e-8)).max()
    )


# ---- betweenness / clustering oracles ----

def brute_betweenness(graph):
    """All-pairs shortest-path enumeration. Returns (node, edge) betweenness
    under the 2/((n-1)(n-2)) and 2/(n(n-1)) normalizations."""
    n = graph.num_nodes
    adj = [sorted(s) for s in graph.neighbor_sets()]
    slot = {}
    for idx, (i, j) in enumerate(graph.edges.tolist()):
        slot[(i, j)] = idx
        slot[(j, i)] = idx
    node_acc = np.zeros(n, dtype=np.float64)
    edge_acc = np.zeros(graph.num_edges, dtype=np.float64)
    for s in range(n):
        # BFS predecessors
        dist = {s: 0}
        preds = {s: []}
        frontier = [s]
        while frontier:
            nxt = []
            for v in frontier:
                for w in adj[v]:
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        preds[w] = [v]
                        nxt.append(w)
                    elif dist[w] == dist[v] + 1:
                        preds[w].append(v)
            frontier = nxt
        for t in range(s + 1, n):
            if t not in dist:
                continue
            paths = []

            def walk(v, tail):
                if v == s:
                    paths.append([s] + tail)
                    return
                for p in preds[v]:
                    walk(p, [v] + tail)

            walk(t, [])
            w = 1.0 / len(paths)
            for path in paths:
                for v in path[1:-1]:
                    node_acc[v] += w
                for a, b in zip(path, path[1:]):
                    edge_acc[slot[(a, b)]] += w
    node_bet = node_acc * (2.0 / ((n - 1) * (n - 2))) if n >= 3 else node_acc
    edge_bet = edge_acc * (2.0 / (n * (n - 1))) if n >= 2 else edge_acc
    return node_bet, edge_bet


def brute_clustering(graph):
    nbrs = graph.neighbor_sets()
    n = graph.num_nodes
    total = 0.0
    for v in range(n):
        d = len(nbrs[v])
        if d < 2:
            continue
        tri = 0
        ns = sorted(nbrs[v])
        for a in range(len(ns)):
            for b in range(a + 1, len(ns)):
                if ns[b] in nbrs[ns[a]]:
                    tri += 1
        total += 2 * tri / (d * (d - 1))
    return total / n if n else 0.0


# ---- instrumented MAC counting ----

def instrumented_macs(entries, num_nodes, alive_mats, literal=True):
    """Count multiplications of an aggregate-then-transform forward pass.

    entries: stored (i, j) pairs of the masked normalized adjacency,
    self-loops included. literal=True increments one multiply at a time;
    literal=False counts one row of the transform and multiplies by the row
    count (identical by construction), for large graphs.
    """
    per_layer = []
    for alive in alive_mats:
        f_in = alive.shape[0]
        agg = 0
        if literal:
            for _ in entries:
                for _ in range(f_in):
                    agg += 1
        else:
            for _ in entries:
                agg += f_in
        row = 0
        for a in range(alive.shape[0]):
            for b in range(alive.shape[1]):
                if alive[a, b]:
                    row += 1
        if literal:
            trans = 0
            for _ in range(num_nodes):
                trans += row
        else:
            trans = num_nodes * row
        per_layer.append((agg, trans))
    agg = sum(a for a, _ in per_layer)
    trans = sum(t for _, t in per_layer)
    return agg, trans, per_layer


def masked_adjacency_entries(graph, edge_alive):
    """Stored entries of the masked normalized adjacency: both directions of
    every alive edge plus all self-loops."""
    entries = [(i, i) for i in range(graph.num_nodes)]
    for k, (i, j) in enumerate(graph.edges.tolist()):
        if edge_alive[k]:
            entries.append((i, j))
            entries.append((j, i))
    return entries
