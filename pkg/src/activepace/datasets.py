"""Flat-file dataset ingestion: delimited text and a packed binary format."""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import UNKNOWN, FeatureStore

MAGIC = b"ASPL1"


class LoadError(ValueError):
    """Malformed dataset file; message names the offending row/offset."""


def save_text(store: FeatureStore, path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        cols = ["id"] + [f"f{k}" for k in range(store.d)]
        if store.truth is not None:
            cols.append("label")
        fh.write(",".join(cols) + "\n")
        for i in range(store.n):
            row = [store.sample_ids[i]] + [repr(float(x)) for x in store.features[i]]
            if store.truth is not None:
                k = int(store.truth[i])
                row.append("unknown" if k == UNKNOWN else store.truth_names[k])
            fh.write(",".join(row) + "\n")


def load_text(path: str | Path) -> FeatureStore:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise LoadError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "id":
        raise LoadError(f"{path}: line 1: header must start with 'id'")
    has_label = header[-1] == "label"
    d = len(header) - 1 - int(has_label)
    if d < 1 or header[1 : 1 + d] != [f"f{k}" for k in range(d)]:
        raise LoadError(f"{path}: line 1: malformed feature columns")
    ids: list[str] = []
    feats: list[list[float]] = []
    labels: list[str] = []
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise LoadError(f"{path}: line {ln}: expected {len(header)} fields, got {len(parts)}")
        ids.append(parts[0])
        row = []
        for k in range(d):
            try:
                x = float(parts[1 + k])
            except ValueError:
                raise LoadError(f"{path}: line {ln}: column f{k}: not a number") from None
            if not np.isfinite(x):
                raise LoadError(f"{path}: line {ln}: column f{k}: non-finite value")
            row.append(x)
        feats.append(row)
        if has_label:
            labels.append(parts[-1])
    truth = None
    names: list[str] = []
    if has_label:
        for name in labels:
            if name != "unknown" and name not in names:
                names.append(name)
        truth = np.array([UNKNOWN if v == "unknown" else names.index(v) for v in labels])
    return FeatureStore(features=np.array(feats, dtype=np.float64), sample_ids=ids,
                        truth=truth, category_names=list(names), truth_names=list(names))


def save_binary(store: FeatureStore, path: str | Path) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIB", store.n, store.d, int(store.truth is not None)))
        fh.write(store.features.astype("<f4").tobytes())
        if store.truth is not None:
            fh.write(store.truth.astype("<i4").tobytes())


def load_binary(path: str | Path) -> FeatureStore:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:5] != MAGIC:
        raise LoadError(f"{path}: offset 0: unknown magic {blob[:5]!r}")
    if len(blob) < 14:
        raise LoadError(f"{path}: offset 5: truncated header")
    n, d, has_truth = struct.unpack("<IIB", blob[5:14])
    need = 14 + 4 * n * d + (4 * n if has_truth else 0)
    if len(blob) != need:
        raise LoadError(f"{path}: offset {len(blob)}: expected {need} bytes")
    feats = np.frombuffer(blob, dtype="<f4", count=n * d, offset=14).reshape(n, d)
    if not np.all(np.isfinite(feats)):
        bad = np.argwhere(~np.isfinite(feats))[0]
        raise LoadError(f"{path}: row {bad[0]}, column {bad[1]}: non-finite value")
    truth = None
    names: list[str] = []
    if has_truth:
        truth = np.frombuffer(blob, dtype="<i4", count=n, offset=14 + 4 * n * d).astype(np.int64)
        hi = int(truth.max(initial=-1))
        names = [f"c{k}" for k in range(hi + 1)]
    return FeatureStore(features=feats.astype(np.float64), sample_ids=[f"s{i}" for i in range(n)],
                        truth=truth, category_names=list(names), truth_names=list(names))


def load_dataset(path: str | Path, format: str | None = None) -> FeatureStore:
    path = Path(path)
    if format is None:
        format = "packed-binary" if path.read_bytes()[:5] == MAGIC else "delimited-text"
    if format == "delimited-text":
        return load_text(path)
    if format == "packed-binary":
        return load_binary(path)
    raise LoadError(f"unknown dataset format {format!r}")


def save_dataset(store: FeatureStore, path: str | Path, format: str = "delimited-text") -> None:
    if format == "delimited-text":
        save_text(store, path)
    elif format == "packed-binary":
        save_binary(store, path)
    else:
        raise LoadError(f"unknown dataset format {format!r}")
