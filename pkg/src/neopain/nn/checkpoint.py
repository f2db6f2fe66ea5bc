"""Versioned weight-checkpoint file format.

Layout (little-endian):

    8 bytes   magic ``b"NPCKPT\\x00\\x01"`` (name + format version 1)
    8 bytes   uint64 byte length of the JSON index
    N bytes   UTF-8 JSON index: ordered list of
              ``{"name": str, "shape": [int...], "dtype": "<f8"}``
    payload   raw array bytes, concatenated in index order

Round trips are bit-exact: arrays are stored as raw little-endian float64.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"NPCKPT\x00\x01"


def save_checkpoint(path: str | Path, arrays: dict[str, np.ndarray]) -> None:
    """Write named float64 arrays to ``path`` (creates parent dirs)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    index = []
    blobs = []
    for name in arrays:
        arr = np.ascontiguousarray(np.asarray(arrays[name], dtype="<f8"))
        index.append({"name": name, "shape": list(arr.shape), "dtype": "<f8"})
        blobs.append(arr.tobytes())
    header = json.dumps(index, sort_keys=False, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        index = json.loads(fh.read(header_len).decode("utf-8"))
        out: dict[str, np.ndarray] = {}
        for entry in index:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = fh.read(count * 8)
            arr = np.frombuffer(data, dtype="<f8").reshape(shape).copy()
            out[entry["name"]] = arr
    return out
