"""Binary checkpoint container (see docs/formats.md for the byte layout).

Versioned header, then named records: float32 tensors (little-endian),
bit-packed alive bitmaps, or int64 arrays.
"""

import struct

import numpy as np

MAGIC = b"GLTCKPT\x00"
VERSION = 1

_KIND_F32 = 0
_KIND_BITMAP = 1
_KIND_I64 = 2


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, arrays):
    """Write a name -> array mapping; bool arrays become bitmaps, floats are
    stored as little-endian float32, integers as int64."""
    chunks = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        if arr.dtype == bool:
            kind, payload = _KIND_BITMAP, np.packbits(arr.reshape(-1)).tobytes()
        elif np.issubdtype(arr.dtype, np.floating):
            kind, payload = _KIND_F32, arr.astype("<f4").tobytes()
        elif np.issubdtype(arr.dtype, np.integer):
            kind, payload = _KIND_I64, arr.astype("<i8").tobytes()
        else:
            raise CheckpointError(f"unsupported dtype {arr.dtype} for {name!r}")
        chunks.append(struct.pack("<BB", kind, arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        chunks.append(payload)
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: bad magic")
    at = len(MAGIC)

    def take(n):
        nonlocal at
        if at + n > len(blob):
            raise CheckpointError(f"{path}: truncated")
        out = blob[at:at + n]
        at += n
        return out

    version, count = struct.unpack("<II", take(8))
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    out = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        kind, ndim = struct.unpack("<BB", take(2))
        shape = struct.unpack(f"<{ndim}Q", take(8 * ndim))
        size = int(np.prod(shape)) if shape else 1
        if kind == _KIND_F32:
            arr = np.frombuffer(take(4 * size), dtype="<f4").reshape(shape)
        elif kind == _KIND_I64:
            arr = np.frombuffer(take(8 * size), dtype="<i8").reshape(shape)
        elif kind == _KIND_BITMAP:
            packed = np.frombuffer(take((size + 7) // 8), dtype=np.uint8)
            arr = np.unpackbits(packed, count=size).astype(bool).reshape(shape)
        else:
            raise CheckpointError(f"{path}: unknown record kind {kind}")
        out[name] = arr.copy()
    if at != len(blob):
        raise CheckpointError(f"{path}: trailing bytes")
    return out


def ticket_arrays(params, edge_mask, weight_mask):
    """Standard record set for a ticket: live params, snapshot, both masks."""
    arrays = {}
    for name, t in params.named_tensors():
        arrays[name] = t.data
        arrays[f"snapshot_{name}"] = params.snapshot[name]
    arrays["edge_mask_values"] = edge_mask.values
    arrays["edge_mask_alive"] = edge_mask.alive
    for i, (v, a) in enumerate(zip(weight_mask.values, weight_mask.alive)):
        arrays[f"weight_mask{i}_values"] = v
        arrays[f"weight_mask{i}_alive"] = a
    return arrays
