"""Dual-branch training loop and twin-alignment evaluation.

The encoder is shared; the view branch runs two augmented views through
one projection head under NT-Xent, the twin branch runs each item and
its twin (unaugmented) through a second head. RNG streams are separated
by purpose, and the twin branch draws no randomness of its own, so a
lam=0 run walks the same parameter trajectory as a trainer with the
twin branch deleted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrainerConfig
from .data import ItemKey, PairedDataset
from .model import MLP
from .objectives import nt_xent, unit_rows

_AUG_NOISE = 0.1   # std of the Gaussian view perturbation
_MASK_P = 0.2      # per-coordinate drop probability in a view

_STREAM_ENCODER = 0
_STREAM_VIEW_HEAD = 1
_STREAM_TWIN_HEAD = 2
_STREAM_BATCHES = 3
_STREAM_EVAL = 5


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


@dataclass(frozen=True)
class StepRecord:
    step: int
    l_view: float
    l_twin: float | None
    combined: float


@dataclass(frozen=True)
class TrainingLog:
    records: tuple[StepRecord, ...]
    keys: tuple[ItemKey, ...]
    embeddings: np.ndarray
    encoder_params: tuple[np.ndarray, ...]
    view_head_params: tuple[np.ndarray, ...]
    twin_head_params: tuple[np.ndarray, ...] | None


def _augment(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    noisy = x + _AUG_NOISE * rng.standard_normal(x.shape)
    keep = rng.random(x.shape) >= _MASK_P
    # never let masking zero out a whole row (cosine would be undefined)
    dead = ~keep.any(axis=1)
    keep[dead, 0] = True
    return noisy * keep


def train(dataset: PairedDataset, cfg: TrainerConfig, twin_branch: bool = True) -> TrainingLog:
    """Run cfg.steps of SGD; returns per-step losses and final embeddings.

    twin_branch=False deletes the twin branch outright (the comparison
    baseline for the lam=0 equivalence property); its losses are logged
    as None. With cfg.single_branch both branches share one head.
    """
    n = dataset.n_items
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds dataset size {n}")
    encoder = MLP(_rng(cfg.seed, _STREAM_ENCODER), [dataset.dim, cfg.encoder_width],
                  final_tanh=True)
    head_sizes = [cfg.encoder_width] * (cfg.head_depth + 1)
    view_head = MLP(_rng(cfg.seed, _STREAM_VIEW_HEAD), head_sizes)
    if not twin_branch:
        twin_head = None
    elif cfg.single_branch:
        twin_head = view_head
    else:
        twin_head = MLP(_rng(cfg.seed, _STREAM_TWIN_HEAD), head_sizes)

    rng = _rng(cfg.seed, _STREAM_BATCHES)
    records = []
    for step in range(1, cfg.steps + 1):
        idx = rng.choice(n, size=cfg.batch_size, replace=False)
        x = dataset.vectors[idx]
        v1 = _augment(x, rng)
        v2 = _augment(x, rng)

        h1, cache_h1 = encoder.forward(v1)
        h2, cache_h2 = encoder.forward(v2)
        z1, cache_z1 = view_head.forward(h1)
        z2, cache_z2 = view_head.forward(h2)
        l_view, (gz1, gz2) = nt_xent(z1, z2, cfg.temperature)

        gh1, view_g1 = view_head.backward(gz1, cache_z1)
        gh2, view_g2 = view_head.backward(gz2, cache_z2)
        _, enc_g1 = encoder.backward(gh1, cache_h1)
        _, enc_g2 = encoder.backward(gh2, cache_h2)
        encoder_grads = [enc_g1, enc_g2]
        view_grads = [view_g1, view_g2]
        twin_grads = []

        if twin_head is not None:
            xt = dataset.vectors[dataset.twin_rows[idx]]
            ha, cache_ha = encoder.forward(x)
            ht, cache_ht = encoder.forward(xt)
            za, cache_za = twin_head.forward(ha)
            zt, cache_zt = twin_head.forward(ht)
            l_twin, (gza, gzt) = nt_xent(za, zt, cfg.temperature)
            combined = l_view + cfg.lam * l_twin
            if cfg.lam > 0:
                gha, tg1 = twin_head.backward(cfg.lam * gza, cache_za)
                ght, tg2 = twin_head.backward(cfg.lam * gzt, cache_zt)
                _, eg3 = encoder.backward(gha, cache_ha)
                _, eg4 = encoder.backward(ght, cache_ht)
                encoder_grads += [eg3, eg4]
                if twin_head is view_head:
                    view_grads += [tg1, tg2]
                else:
                    twin_grads += [tg1, tg2]
        else:
            l_twin = None
            combined = l_view

        encoder.apply_gradients(MLP.sum_gradients(*encoder_grads), cfg.learning_rate)
        view_head.apply_gradients(MLP.sum_gradients(*view_grads), cfg.learning_rate)
        if twin_grads:
            twin_head.apply_gradients(MLP.sum_gradients(*twin_grads), cfg.learning_rate)
        records.append(StepRecord(step=step, l_view=l_view, l_twin=l_twin, combined=combined))

    eval_head = twin_head if twin_head is not None else view_head
    hidden, _ = encoder.forward(dataset.vectors)
    embeddings, _ = eval_head.forward(hidden)
    return TrainingLog(
        records=tuple(records),
        keys=dataset.keys,
        embeddings=embeddings,
        encoder_params=encoder.snapshot(),
        view_head_params=view_head.snapshot(),
        twin_head_params=(
            twin_head.snapshot() if twin_head is not None and twin_head is not view_head else None
        ),
    )


def evaluate_twin_alignment(embeddings, twins, seed: int = 0) -> tuple[float, float]:
    """(mean twin-pair cosine, mean random-pair cosine) over all items.

    twins may be the PairedDataset or a flat array of twin row indices.
    The random control redraws one partner per item from a seeded
    stream, never the item itself.
    """
    twin_rows = twins.twin_rows if isinstance(twins, PairedDataset) else np.asarray(twins)
    emb = np.asarray(embeddings, dtype=np.float64)
    n = twin_rows.shape[0]
    if emb.ndim != 2 or emb.shape[0] != n:
        raise ValueError(
            f"missing embeddings: need one row per item ({n}), got shape {emb.shape}"
        )
    if n < 2:
        raise ValueError(f"need at least 2 items, got {n}")
    unit, _ = unit_rows(emb)
    twin_mean = float(np.mean(np.einsum("ij,ij->i", unit, unit[twin_rows])))
    rng = _rng(seed, _STREAM_EVAL)
    partner = (np.arange(n) + rng.integers(1, n, size=n)) % n
    random_mean = float(np.mean(np.einsum("ij,ij->i", unit, unit[partner])))
    return twin_mean, random_mean
