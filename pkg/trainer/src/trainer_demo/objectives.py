"""Contrastive objective used by both branches, with analytic gradients."""

from __future__ import annotations

import numpy as np


def unit_rows(x, name: str = "embeddings"):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    norms = np.linalg.norm(arr, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise ValueError(f"{name} row {int(bad[0])} has zero norm")
    return arr / norms[:, None], norms


def nt_xent(z1, z2, temperature: float = 0.5):
    """NT-Xent over the stacked 2b-view batch.

    Row i of z1 and row i of z2 are positives; every other row of the
    stack is a negative. Returns (loss, (grad_z1, grad_z2)) with
    gradients w.r.t. the raw inputs.
    """
    if not (temperature > 0):
        raise ValueError(f"temperature must be positive, got {temperature}")
    a = np.asarray(z1, dtype=np.float64)
    c = np.asarray(z2, dtype=np.float64)
    if a.shape != c.shape or a.ndim != 2:
        raise ValueError(f"z1 and z2 must be equal-shape matrices, got {a.shape} and {c.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(c))):
        raise ValueError("embeddings contain non-finite values")
    b = a.shape[0]
    total = 2 * b
    unit, norms = unit_rows(np.vstack([a, c]))
    scores = unit @ unit.T / temperature
    np.fill_diagonal(scores, -np.inf)
    partner = np.concatenate([np.arange(b) + b, np.arange(b)])

    peak = scores.max(axis=1)
    expd = np.exp(scores - peak[:, None])
    np.fill_diagonal(expd, 0.0)
    mass = expd.sum(axis=1)
    per_anchor = peak + np.log(mass) - scores[np.arange(total), partner]
    loss = float(per_anchor.mean())

    soft = expd / mass[:, None]
    soft[np.arange(total), partner] -= 1.0
    soft /= total
    grad_unit = (soft + soft.T) @ unit / temperature
    radial = np.einsum("ij,ij->i", grad_unit, unit)
    grad_raw = (grad_unit - radial[:, None] * unit) / norms[:, None]
    return loss, (grad_raw[:b], grad_raw[b:])
