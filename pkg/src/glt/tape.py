"""Minimal reverse-mode autodiff over 2-D tensors.

Covers exactly what mask-regularized GCN training needs: dense matmul,
masked sparse-dense aggregation, elementwise products, ReLU, row-bias
addition, the two losses, and l1 penalties. Storage is float32 by default
(float64 supported for gradient checking); hand-written reductions always
accumulate in float64. Dense matmul is delegated to BLAS.
"""

import numpy as np

from glt import kernels

_FLOAT_DTYPES = (np.float32, np.float64)


class Tensor:
    """2-D array with an optional gradient buffer of the same shape."""

    def __init__(self, data, requires_grad=False):
        data = np.array(data, copy=True)
        if data.dtype not in _FLOAT_DTYPES:
            data = data.astype(np.float32)
        if data.ndim == 0:
            data = data.reshape(1, 1)
        elif data.ndim == 1:
            data = data.reshape(-1, 1)
        elif data.ndim != 2:
            raise ValueError("tensors are 2-D")
        self.data = np.ascontiguousarray(data)
        self.requires_grad = bool(requires_grad)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data.reshape(-1)[0])


def softmax(logits):
    """Row softmax with max subtraction, computed in float64."""
    z = logits.astype(np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class Tape:
    """Ordered op record; backward() replays it in reverse exactly once."""

    def __init__(self):
        self._ops = []  # (output, inputs, backward_fn)
        self._tensors = []
        self._seen = set()
        self._done = False

    def _track(self, *tensors):
        for t in tensors:
            if isinstance(t, Tensor) and id(t) not in self._seen:
                self._seen.add(id(t))
                self._tensors.append(t)

    def _record(self, out, inputs, backward_fn, name):
        if not np.all(np.isfinite(out.data)):
            raise FloatingPointError(f"non-finite values out of {name}")
        out.requires_grad = any(t.requires_grad for t in inputs if isinstance(t, Tensor))
        self._track(out, *inputs)
        if out.requires_grad:
            self._ops.append((out, backward_fn))
        return out

    @staticmethod
    def _accum(t, val):
        if t.grad is None:
            t.grad = np.zeros_like(t.data)
        t.grad += val.astype(t.dtype).reshape(t.shape)

    # ---- ops ----

    def matmul(self, a, b):
        if a.shape[1] != b.shape[0]:
            raise ValueError(f"matmul shape mismatch {a.shape} x {b.shape}")
        with np.errstate(over="ignore"):  # _record turns overflow into an error
            out = Tensor(a.data @ b.data)

        def backward():
            g = out.grad
            if a.requires_grad:
                self._accum(a, g @ b.data.T)
            if b.requires_grad:
                self._accum(b, a.data.T @ g)

        return self._record(out, (a, b), backward, "matmul")

    def mul(self, a, b):
        if a.shape != b.shape:
            raise ValueError(f"mul shape mismatch {a.shape} vs {b.shape}")
        out = Tensor(a.data * b.data)

        def backward():
            g = out.grad
            if a.requires_grad:
                self._accum(a, g * b.data)
            if b.requires_grad:
                self._accum(b, g * a.data)

        return self._record(out, (a, b), backward, "mul")

    def add_bias(self, x, bias):
        if bias.shape != (1, x.shape[1]):
            raise ValueError(f"bias shape {bias.shape} does not fit {x.shape}")
        out = Tensor(x.data + bias.data)

        def backward():
            g = out.grad
            if x.requires_grad:
                self._accum(x, g)
            if bias.requires_grad:
                self._accum(bias, g.sum(axis=0, keepdims=True, dtype=np.float64))

        return self._record(out, (x, bias), backward, "add_bias")

    def relu(self, x):
        out = Tensor(np.maximum(x.data, 0))

        def backward():
            if x.requires_grad:
                self._accum(x, out.grad * (x.data > 0))

        return self._record(out, (x,), backward, "relu")

    def spmm(self, adj, h):
        """Masked (or plain) normalized adjacency times dense features.

        Backward w.r.t. h reuses the same symmetric matrix; backward w.r.t.
        the mask routes through the per-edge kernel using unmasked values.
        """
        csr = adj.csr
        if csr.num_nodes != h.shape[0]:
            raise ValueError("adjacency/features row mismatch")
        mask = getattr(adj, "mask", None)
        data = adj.data.astype(h.dtype, copy=False)
        out = Tensor(kernels.spmm(csr.indptr, csr.indices, data, h.data))
        norm = getattr(adj, "norm", adj)

        def backward():
            g = out.grad
            if h.requires_grad:
                self._accum(h, kernels.spmm(csr.indptr, csr.indices, data, g))
            if mask is not None and mask.requires_grad:
                gm = kernels.edge_grad(
                    csr.indptr, csr.indices, norm.data.astype(h.dtype, copy=False),
                    csr.entry_slot, g, h.data, mask.shape[0],
                )
                self._accum(mask, gm)

        inputs = (h, mask) if mask is not None else (h,)
        return self._record(out, inputs, backward, "spmm")

    def pair_dot(self, emb, pairs):
        """Row-pair inner products: out[p] = <emb[u_p], emb[v_p]>."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= emb.shape[0]):
            raise IndexError("pair index out of range")
        u, v = pairs[:, 0], pairs[:, 1]
        vals = np.einsum(
            "pf,pf->p", emb.data[u].astype(np.float64), emb.data[v].astype(np.float64)
        )
        out = Tensor(vals.astype(emb.dtype).reshape(-1, 1))

        def backward():
            if emb.requires_grad:
                g = out.grad.reshape(-1, 1)
                acc = np.zeros_like(emb.data)
                np.add.at(acc, u, g * emb.data[v])
                np.add.at(acc, v, g * emb.data[u])
                self._accum(emb, acc)

        return self._record(out, (emb,), backward, "pair_dot")

    def softmax_cross_entropy(self, logits, labels, rows):
        """Mean cross-entropy over the given rows, float64 internally."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        if rows.size == 0:
            raise ValueError("softmax_cross_entropy over an empty row set")
        labels = np.asarray(labels, dtype=np.int64)
        if np.any(labels[rows] < 0):
            raise ValueError("cross-entropy row set contains unlabeled nodes")
        sel = logits.data[rows].astype(np.float64)
        sel -= sel.max(axis=1, keepdims=True)
        lse = np.log(np.exp(sel).sum(axis=1))
        picked = sel[np.arange(rows.size), labels[rows]]
        out = Tensor(np.array((lse - picked).mean(), dtype=logits.dtype))

        def backward():
            if logits.requires_grad:
                p = np.exp(sel - lse[:, None])
                p[np.arange(rows.size), labels[rows]] -= 1.0
                full = np.zeros(logits.shape, dtype=np.float64)
                full[rows] = p * (out.grad.item() / rows.size)
                self._accum(logits, full)

        return self._record(out, (logits,), backward, "softmax_cross_entropy")

    def sigmoid_bce(self, scores, targets):
        """Mean binary cross-entropy on raw scores (stable log1p form)."""
        t = np.asarray(targets, dtype=np.float64).reshape(-1)
        s = scores.data.astype(np.float64).reshape(-1)
        if s.shape != t.shape:
            raise ValueError("scores/targets length mismatch")
        loss = np.maximum(s, 0) - s * t + np.log1p(np.exp(-np.abs(s)))
        out = Tensor(np.array(loss.mean(), dtype=scores.dtype))

        def backward():
            if scores.requires_grad:
                sig = 1.0 / (1.0 + np.exp(-s))
                g = (sig - t) * (out.grad.item() / s.size)
                self._accum(scores, g.reshape(scores.shape))

        return self._record(out, (scores,), backward, "sigmoid_bce")

    def l1_penalty(self, x):
        """Sum of |x|; subgradient at 0 is 0."""
        out = Tensor(np.array(np.abs(x.data).sum(dtype=np.float64), dtype=x.dtype))

        def backward():
            if x.requires_grad:
                self._accum(x, out.grad.item() * np.sign(x.data))

        return self._record(out, (x,), backward, "l1_penalty")

    def scalar_add(self, a, b):
        if a.shape != (1, 1) or b.shape != (1, 1):
            raise ValueError("scalar_add expects scalars")
        out = Tensor(a.data + b.data)

        def backward():
            if a.requires_grad:
                self._accum(a, out.grad)
            if b.requires_grad:
                self._accum(b, out.grad)

        return self._record(out, (a, b), backward, "scalar_add")

    def scalar_scale(self, a, c):
        if a.shape != (1, 1):
            raise ValueError("scalar_scale expects a scalar tensor")
        out = Tensor(a.data * a.dtype.type(c))

        def backward():
            if a.requires_grad:
                self._accum(a, out.grad * np.float64(c))

        return self._record(out, (a,), backward, "scalar_scale")

    # ---- driver ----

    def backward(self, loss):
        if self._done:
            raise RuntimeError("backward already ran on this tape; reset() first")
        if loss.shape != (1, 1):
            raise ValueError("loss must be scalar")
        self._done = True
        loss.grad = np.ones((1, 1), dtype=loss.dtype)
        for out, fn in reversed(self._ops):
            if out.grad is not None:
                fn()

    def reset(self):
        """Drop the op record and zero every gradient this tape touched."""
        for t in self._tensors:
            t.grad = None
        self._ops.clear()
        self._tensors.clear()
        self._seen.clear()
        self._done = False
