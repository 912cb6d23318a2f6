"""Checkpoint/restore for a running engine.

The on-disk format is a version-tagged pickle; restore refuses anything it
cannot replay identically.
"""
from __future__ import annotations

import pickle
from pathlib import Path

from .engine import Engine

FORMAT_VERSION = 1
_HEADER = b"APCKPT"


class CheckpointError(RuntimeError):
    pass


def checkpoint(engine: Engine, path: str | Path) -> None:
    path = Path(path)
    payload = pickle.dumps((FORMAT_VERSION, engine), protocol=pickle.HIGHEST_PROTOCOL)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(_HEADER + payload)
    tmp.replace(path)


def restore(path: str | Path) -> Engine:
    path = Path(path)
    blob = path.read_bytes()
    if blob[: len(_HEADER)] != _HEADER:
        raise CheckpointError(f"{path}: not a checkpoint file")
    try:
        version, engine = pickle.loads(blob[len(_HEADER):])
    except Exception as exc:
        raise CheckpointError(f"{path}: corrupt or truncated checkpoint") from exc
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: incompatible checkpoint version {version}")
    return engine
