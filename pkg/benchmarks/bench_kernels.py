"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--nodes N] [--avg-degree D]
"""

import argparse
import time

import numpy as np

from glt import kernels
from glt.data import synth_citation
from glt.graphs import normalize_adjacency


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=2708)
    ap.add_argument("--avg-degree", type=float, default=3.9)
    ap.add_argument("--cols", type=int, default=16)
    args = ap.parse_args()

    ds = synth_citation(num_nodes=args.nodes, feature_dim=8,
                        avg_degree=args.avg_degree, seed=1)
    g = ds.graph
    norm = normalize_adjacency(g)
    csr = norm.csr
    rng = np.random.default_rng(0)
    dense = rng.normal(size=(g.num_nodes, args.cols)).astype(np.float32)
    gout = rng.normal(size=(g.num_nodes, args.cols)).astype(np.float32)

    backends = ["python"] + (["ext"] if kernels.HAVE_EXT else [])
    print(f"graph: {g.num_nodes} nodes, {g.num_edges} edges, "
          f"{args.cols} feature columns")
    rows = {}
    for backend in backends:
        kernels.use_backend(backend)
        rows[backend] = {
            "spmm": timeit(lambda: kernels.spmm(csr.indptr, csr.indices,
                                                norm.data, dense)),
            "edge_grad": timeit(lambda: kernels.edge_grad(
                csr.indptr, csr.indices, norm.data, csr.entry_slot,
                gout, dense, g.num_edges)),
            "brandes": timeit(lambda: kernels.brandes(
                g.csr.indptr, g.csr.indices, g.csr.entry_slot, g.num_edges),
                repeat=2),
        }
    kernels.use_backend("auto")

    names = ["spmm", "edge_grad", "brandes"]
    header = f"{'kernel':<12}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name in names:
        line = f"{name:<12}"
        for b in backends:
            line += f"{rows[b][name] * 1e3:>12.2f}ms"
        if len(backends) == 2:
            line += f"{rows['python'][name] / rows['ext'][name]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
