"""Numpy fallback for the compiled kernels.

Same contracts as glt.kernels._ext: CSR sparse-dense product and the
per-edge mask gradient accumulate in float64 regardless of storage dtype,
and Brandes accumulation runs one source at a time so results are
deterministic.
"""

import numpy as np

NAME = "python"


def spmm(indptr, indices, data, dense):
    """CSR [n x n] times dense [n x f]; float64 accumulation per row."""
    n = indptr.shape[0] - 1
    out = np.zeros((n, dense.shape[1]), dtype=np.float64)
    nnz = indices.shape[0]
    if nnz:
        contrib = data[:, None].astype(np.float64) * dense[indices].astype(np.float64)
        starts = indptr[:-1]
        nonempty = starts < indptr[1:]
        # reduceat misbehaves on empty segments, so reduce only the real ones
        out[nonempty] = np.add.reduceat(contrib, starts[nonempty], axis=0)
    return out.astype(dense.dtype)


def edge_grad(indptr, indices, base, slots, gout, h, num_slots):
    """Gradient of the loss w.r.t. per-edge mask scalars.

    For each stored entry e = (i, j) with slots[e] >= 0:
        grad[slots[e]] += base[e] * dot(gout[i], h[j])
    base holds the unmasked normalized-adjacency values.
    """
    rows = np.repeat(np.arange(indptr.shape[0] - 1), np.diff(indptr))
    off = slots >= 0
    grad = np.zeros(num_slots, dtype=np.float64)
    if off.any():
        per_entry = np.einsum(
            "ef,ef->e",
            gout[rows[off]].astype(np.float64),
            h[indices[off]].astype(np.float64),
        )
        np.add.at(grad, slots[off], base[off].astype(np.float64) * per_entry)
    return grad.astype(gout.dtype)


def _adjacent_entries(indptr, frontier):
    """Concatenated CSR entry indices for a set of row ids, without a per-row loop."""
    lens = indptr[frontier + 1] - indptr[frontier]
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    shifts = np.concatenate([[0], np.cumsum(lens)[:-1]])
    return np.repeat(indptr[frontier] - shifts, lens) + np.arange(total)


def brandes(indptr, indices, entry_slot, num_edges):
    """Unnormalized betweenness accumulation over all BFS sources.

    Returns (node_acc[n], edge_acc[num_edges]) as float64; every unordered
    source/target pair contributes twice, which the callers rescale.
    Level-synchronous so each source costs a few vectorized passes per level.
    """
    n = indptr.shape[0] - 1
    node_acc = np.zeros(n, dtype=np.float64)
    edge_acc = np.zeros(num_edges, dtype=np.float64)
    if n == 0 or indices.shape[0] == 0:
        return node_acc, edge_acc
    indptr = indptr.astype(np.int64)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    cols = indices
    for s in range(n):
        depth = np.full(n, -1, dtype=np.int64)
        sigma = np.zeros(n, dtype=np.float64)
        depth[s] = 0
        sigma[s] = 1.0
        frontier = np.array([s], dtype=np.int64)
        levels = [frontier]
        while True:
            e = _adjacent_entries(indptr, frontier)
            if e.size == 0:
                break
            undiscovered = depth[cols[e]] == -1
            nxt = np.unique(cols[e[undiscovered]])
            depth[nxt] = depth[frontier[0]] + 1
            tree = e[depth[cols[e]] == depth[rows[e]] + 1]
            np.add.at(sigma, cols[tree], sigma[rows[tree]])
            if nxt.size == 0:
                break
            frontier = nxt
            levels.append(frontier)
        delta = np.zeros(n, dtype=np.float64)
        for frontier in reversed(levels[1:]):
            e = _adjacent_entries(indptr, frontier)
            dag = e[depth[cols[e]] == depth[rows[e]] - 1]
            # dag entries run from w in this level back to a predecessor v
            w, v = rows[dag], cols[dag]
            coeff = sigma[v] / sigma[w] * (1.0 + delta[w])
            np.add.at(delta, v, coeff)
            np.add.at(edge_acc, entry_slot[dag], coeff)
        delta[s] = 0.0
        node_acc += delta
    return node_acc, edge_acc
