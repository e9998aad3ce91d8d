"""Contrastive losses with analytic gradients.

NT-Xent over a 2b-view batch and negative cosine similarity, plus the
lambda-weighted combination of a view loss and a twin loss. Gradients
are derived by hand (no autodiff dependency) so they can be checked
against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LossConfig",
    "as_embedding_batch",
    "nt_xent",
    "neg_cosine",
    "combined_loss",
]


@dataclass(frozen=True)
class LossConfig:
    temperature: float = 0.5
    lam: float = 1.0

    def __post_init__(self):
        if not (self.temperature > 0):
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if not (self.lam >= 0):
            raise ValueError(f"lambda weight must be nonnegative, got {self.lam}")


def as_embedding_batch(vectors, name: str = "embeddings") -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a (b, dim) matrix with b, dim >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _normalize_rows(arr: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray]:
    norms = np.sqrt(np.einsum("ij,ij->i", arr, arr))
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"{name} row {int(zero[0])} has zero norm; cosine undefined")
    return arr / norms[:, None], norms


def nt_xent(z1, z2, temperature: float = 0.5):
    """Normalized temperature-scaled cross entropy over the 2b-view batch.

    Rows of z1 and z2 are paired views of the same item. All 2b vectors
    are L2-normalized and compared by cosine similarity divided by the
    temperature; each of the 2b anchors scores its counterpart view
    against the other 2b-1 vectors under a softmax, and the loss is the
    mean cross entropy. With b=1 the positive is the only candidate, so
    the loss is exactly zero.

    Returns (loss, (grad_z1, grad_z2)) with gradients taken with respect
    to the raw (pre-normalization) inputs.
    """
    if not (temperature > 0):
        raise ValueError(f"temperature must be positive, got {temperature}")
    a = as_embedding_batch(z1, "z1")
    c = as_embedding_batch(z2, "z2")
    if a.shape != c.shape:
        raise ValueError(f"z1 and z2 shapes differ: {a.shape} vs {c.shape}")
    b = a.shape[0]
    m = 2 * b
    raw = np.vstack([a, c])
    unit, norms = _normalize_rows(raw, "embeddings")
    sim = unit @ unit.T / temperature
    np.fill_diagonal(sim, -np.inf)
    pos = np.concatenate([np.arange(b) + b, np.arange(b)])

    row_max = np.max(sim, axis=1)
    shifted = np.exp(sim - row_max[:, None])
    np.fill_diagonal(shifted, 0.0)
    denom = np.sum(shifted, axis=1)
    # loss_i = logsumexp(row) - sim[i, pos]; exact 0 when the positive is alone
    losses = row_max + np.log(denom) - sim[np.arange(m), pos]
    loss = float(np.mean(losses))

    probs = shifted / denom[:, None]
    grad_sim = probs.copy()
    grad_sim[np.arange(m), pos] -= 1.0
    grad_sim /= m
    grad_unit = (grad_sim + grad_sim.T) @ unit / temperature
    # through u = v/|v|: dv = (du - (du.u) u) / |v|
    inner = np.einsum("ij,ij->i", grad_unit, unit)
    grad_raw = (grad_unit - inner[:, None] * unit) / norms[:, None]
    return loss, (grad_raw[:b], grad_raw[b:])


def neg_cosine(z, z_other):
    """Mean negative cosine similarity between paired rows.

    Returns (loss, (grad_z, grad_z_other)); callers implementing a
    stop-gradient branch simply discard the gradient for the detached
    side.
    """
    a = as_embedding_batch(z, "z")
    c = as_embedding_batch(z_other, "z_other")
    if a.shape != c.shape:
        raise ValueError(f"z and z_other shapes differ: {a.shape} vs {c.shape}")
    b = a.shape[0]
    ua, na = _normalize_rows(a, "z")
    uc, nc = _normalize_rows(c, "z_other")
    cos = np.einsum("ij,ij->i", ua, uc)
    loss = float(-np.mean(cos))
    grad_a = -(uc - cos[:, None] * ua) / (b * na[:, None])
    grad_c = -(ua - cos[:, None] * uc) / (b * nc[:, None])
    return loss, (grad_a, grad_c)


def combined_loss(l_view: float, l_twin: float, lam: float) -> float:
    """View loss plus lambda times twin loss; affine in lambda by construction."""
    for name, v in (("l_view", l_view), ("l_twin", l_twin), ("lam", lam)):
        if not np.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")
    if lam < 0:
        raise ValueError(f"lambda weight must be nonnegative, got {lam}")
    return float(l_view) + float(lam) * float(l_twin)
