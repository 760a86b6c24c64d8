"""Joint graph/weight pruning for GCNs and lottery-ticket search."""

__version__ = "0.1.0"
