# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: CSR spmm, per-edge mask gradients, Brandes accumulation.

Mirrors glt.kernels._py entry for entry; reductions accumulate in float64.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

ctypedef fused floating:
    float
    double

NAME = "ext"


def spmm(const cnp.int64_t[::1] indptr, const cnp.int32_t[::1] indices, const floating[::1] data,
         const floating[:, ::1] dense):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t f = dense.shape[1]
    cdef Py_ssize_t i, e, k
    cdef double v
    out_arr = np.zeros((n, f), dtype=np.asarray(dense).dtype)
    cdef floating[:, ::1] out = out_arr
    acc_arr = np.zeros(f, dtype=np.float64)
    cdef double[::1] acc = acc_arr
    cdef cnp.int32_t col
    for i in range(n):
        for k in range(f):
            acc[k] = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            col = indices[e]
            v = <double> data[e]
            for k in range(f):
                acc[k] += v * <double> dense[col, k]
        for k in range(f):
            out[i, k] = <floating> acc[k]
    return out_arr


def edge_grad(const cnp.int64_t[::1] indptr, const cnp.int32_t[::1] indices, const floating[::1] base,
              const cnp.int32_t[::1] slots, const floating[:, ::1] gout, const floating[:, ::1] h,
              Py_ssize_t num_slots):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t f = gout.shape[1]
    cdef Py_ssize_t i, e, k
    cdef cnp.int32_t col, slot
    cdef double dot
    grad_arr = np.zeros(num_slots, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    for i in range(n):
        for e in range(indptr[i], indptr[i + 1]):
            slot = slots[e]
            if slot < 0:
                continue
            col = indices[e]
            dot = 0.0
            for k in range(f):
                dot += <double> gout[i, k] * <double> h[col, k]
            grad[slot] += <double> base[e] * dot
    return grad_arr.astype(np.asarray(gout).dtype)


def brandes(const cnp.int64_t[::1] indptr, const cnp.int32_t[::1] indices,
            const cnp.int32_t[::1] entry_slot, Py_ssize_t num_edges):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    node_arr = np.zeros(n, dtype=np.float64)
    edge_arr = np.zeros(num_edges, dtype=np.float64)
    if n == 0 or indices.shape[0] == 0:
        return node_arr, edge_arr
    cdef double[::1] node_acc = node_arr
    cdef double[::1] edge_acc = edge_arr
    cdef cnp.int64_t[::1] depth = np.empty(n, dtype=np.int64)
    cdef double[::1] sigma = np.empty(n, dtype=np.float64)
    cdef double[::1] delta = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] order = np.empty(n, dtype=np.int64)  # BFS visit order
    cdef Py_ssize_t s, i, e, head, tail, w, v
    cdef double coeff
    for s in range(n):
        for i in range(n):
            depth[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        depth[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if depth[w] < 0:
                    depth[w] = depth[v] + 1
                    order[tail] = w
                    tail += 1
                if depth[w] == depth[v] + 1:
                    sigma[w] += sigma[v]
        # dependency accumulation in reverse visit order
        for i in range(tail - 1, 0, -1):
            w = order[i]
            for e in range(indptr[w], indptr[w + 1]):
                v = indices[e]
                if depth[v] == depth[w] - 1:
                    coeff = sigma[v] / sigma[w] * (1.0 + delta[w])
                    delta[v] += coeff
                    edge_acc[entry_slot[e]] += coeff
            node_acc[w] += delta[w]
    return node_arr, edge_arr
