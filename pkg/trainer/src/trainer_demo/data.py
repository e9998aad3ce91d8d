"""Twin-dictionary intake and toy dataset construction.

The trainer is deliberately decoupled from the estimator package: its
only contract is the twin-dictionary JSON file, parsed here with plain
json and no other dependency. Items are identified by (video_id,
patch_index) pairs taken from each scene's twins map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ItemKey = tuple[str, int]


def load_twin_pairs(source: bytes | str) -> dict[ItemKey, ItemKey]:
    """Map each item to its twin, per the twin-dictionary file.

    Scenes with a non-null skipped_reason contribute nothing. The map
    need not be symmetric (the producer's selection is argmax-based).
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "scenes" not in doc:
        raise ValueError("not a twin dictionary: missing 'scenes'")
    pairs: dict[ItemKey, ItemKey] = {}
    for vid in sorted(doc["scenes"]):
        entry = doc["scenes"][vid]
        if entry.get("skipped_reason") is not None:
            continue
        if "twins" not in entry:
            raise ValueError(f"scene {vid!r} missing 'twins'")
        twins = entry["twins"]
        for key in sorted(twins, key=int):
            record = twins[key]
            if "twin" not in record:
                raise ValueError(f"scene {vid!r} twin entry {key} missing 'twin'")
            pairs[(vid, int(key))] = (vid, int(record["twin"]))
    if not pairs:
        raise ValueError("twin dictionary holds no usable twin entries")
    return pairs


@dataclass(frozen=True)
class PairedDataset:
    """Feature vectors for every twin-dictionary item, twin links resolved to rows."""

    keys: tuple[ItemKey, ...]
    vectors: np.ndarray
    twin_rows: np.ndarray
    cluster: np.ndarray

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=np.float64)
        rows = np.asarray(self.twin_rows, dtype=np.int64)
        labels = np.asarray(self.cluster, dtype=np.int64)
        n = len(self.keys)
        if vecs.shape[0] != n or rows.shape != (n,) or labels.shape != (n,):
            raise ValueError(
                f"inconsistent dataset: {n} keys, vectors {vecs.shape}, "
                f"twin_rows {rows.shape}, cluster {labels.shape}"
            )
        for arr in (vecs, rows, labels):
            arr.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "twin_rows", rows)
        object.__setattr__(self, "cluster", labels)

    @property
    def n_items(self) -> int:
        return len(self.keys)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def two_cluster_dataset(
    pairs: dict[ItemKey, ItemKey],
    dim: int = 8,
    separation: float = 6.0,
    spread: float = 1.5,
    seed: int = 0,
) -> PairedDataset:
    """Synthetic vectors in two clusters, scenes alternating between them.

    Twins always live within one scene, so they land within one cluster;
    that makes the twin branch's job meaningful without any image data.
    Raises on a twin key with no vector of its own.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if not (separation > 0) or not (spread > 0):
        raise ValueError("separation and spread must be positive")
    keys = tuple(sorted(pairs))
    row_of = {key: row for row, key in enumerate(keys)}
    twin_rows = np.empty(len(keys), dtype=np.int64)
    for row, key in enumerate(keys):
        target = pairs[key]
        if target not in row_of:
            raise ValueError(f"unresolvable twin key {target[0]}:{target[1]}")
        twin_rows[row] = row_of[target]
    scene_order = sorted({vid for vid, _ in keys})
    cluster_of = {vid: pos % 2 for pos, vid in enumerate(scene_order)}
    centers = np.zeros((2, dim))
    centers[0, 0] = -separation / 2.0
    centers[1, 0] = separation / 2.0
    rng = np.random.default_rng([seed, 11])
    vectors = np.empty((len(keys), dim))
    labels = np.empty(len(keys), dtype=np.int64)
    for row, (vid, _) in enumerate(keys):
        labels[row] = cluster_of[vid]
        vectors[row] = centers[labels[row]] + spread * rng.standard_normal(dim)
    return PairedDataset(keys=keys, vectors=vectors, twin_rows=twin_rows, cluster=labels)


def dataset_from_twin_file(
    source: bytes | str,
    dim: int = 8,
    separation: float = 6.0,
    spread: float = 1.5,
    seed: int = 0,
) -> PairedDataset:
    return two_cluster_dataset(
        load_twin_pairs(source), dim=dim, separation=separation, spread=spread, seed=seed
    )
