"""Kernel backend selection: compiled extension when built, numpy otherwise."""

from glt.kernels import _py

try:
    from glt.kernels import _ext

    HAVE_EXT = True
except ImportError:
    _ext = None
    HAVE_EXT = False

_backend = _ext if HAVE_EXT else _py


def use_backend(name):
    """Select 'ext', 'python', or 'auto'. Returns the active backend name."""
    global _backend
    if name == "python":
        _backend = _py
    elif name == "ext":
        if not HAVE_EXT:
            raise RuntimeError("compiled kernels are not built")
        _backend = _ext
    elif name == "auto":
        _backend = _ext if HAVE_EXT else _py
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _backend.NAME


def backend_name():
    return _backend.NAME


def spmm(indptr, indices, data, dense):
    return _backend.spmm(indptr, indices, data, dense)


def edge_grad(indptr, indices, base, slots, gout, h, num_slots):
    return _backend.edge_grad(indptr, indices, base, slots, gout, h, num_slots)


def brandes(indptr, indices, entry_slot, num_edges):
    return _backend.brandes(indptr, indices, entry_slot, num_edges)
