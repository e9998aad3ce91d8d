"""Entropy-based patch filtering and camera-motion correction.

Short clips give too few observations to trust MI between patches that
barely move, so patches are split into high/low entropy groups at the
largest gap of the sorted per-patch entropies. Normally only the
high-entropy group is eligible for twin selection; when the camera is
judged to be moving (outermost-ring patches show more entropy than the
interior, as when the camera tracks a moving subject) the apparent
low-entropy group is the truly moving one, so eligibility flips.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroDistanceError
from .knn_info import EstimatorConfig, kl_entropy
from .trajectory import SceneTrack, Trajectory

__all__ = [
    "EligibilityReport",
    "patch_entropy",
    "max_gap_split",
    "detect_camera_motion",
    "eligible_patches",
]


@dataclass(frozen=True)
class EligibilityReport:
    """Outcome of the entropy filter for one scene.

    entropies holds one value per patch in grid order, with -inf marking
    patches whose entropy could not be estimated (fully degenerate,
    zero k-NN distance); those patches are listed in ``failed`` and
    demoted to the low set. threshold is the midpoint of the maximum
    gap, the lowest entropy when no positive gap exists, or None when
    no patch produced a finite entropy.
    """

    entropies: np.ndarray
    threshold: float | None
    high_set: frozenset[int]
    low_set: frozenset[int]
    camera_moving: bool
    eligible: frozenset[int]
    failed: tuple[int, ...] = ()

    def __post_init__(self):
        ents = np.asarray(self.entropies, dtype=np.float64)
        ents.flags.writeable = False
        object.__setattr__(self, "entropies", ents)


def patch_entropy(traj: Trajectory, cfg: EstimatorConfig = EstimatorConfig()) -> float:
    """k-NN differential entropy of one patch's (F, 3) observation matrix."""
    return kl_entropy(traj.points, cfg)


def max_gap_split(entropies) -> tuple[frozenset[int], frozenset[int], float]:
    """Partition values at the largest gap between consecutive sorted values.

    Returns (high_set, low_set, threshold): low_set holds the indices at
    or below the gap, high_set those above, threshold the midpoint of the
    gap endpoints. Ties go to the earliest gap in sorted order. With a
    single value or all values equal there is no positive gap: everything
    is high, low is empty, and the threshold is the lowest value.
    """
    values = np.asarray(entropies, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 1:
        raise ValueError(f"entropies must be a non-empty flat sequence, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        idx = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ValueError(f"non-finite entropy at index {idx}")
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    gaps = np.diff(sorted_vals)
    if gaps.size == 0 or not np.any(gaps > 0):
        return frozenset(range(values.shape[0])), frozenset(), float(sorted_vals[0])
    split = int(np.argmax(gaps))
    low = frozenset(int(i) for i in order[: split + 1])
    high = frozenset(int(i) for i in order[split + 1:])
    threshold = float((sorted_vals[split] + sorted_vals[split + 1]) / 2.0)
    return high, low, threshold


def detect_camera_motion(scene: SceneTrack, entropies) -> bool:
    """True iff mean entropy on the outermost ring exceeds the interior mean.

    Non-finite entries (failed estimates) are left out of both means so a
    single degenerate patch cannot swamp the comparison. Grids with no
    interior patches, or with either region fully degenerate, are
    reported as static.
    """
    values = np.asarray(entropies, dtype=np.float64)
    if values.shape != (scene.n_patches,):
        raise ValueError(
            f"entropies length {values.shape} does not match {scene.n_patches} patches"
        )
    interior = [i for i in scene.interior_indices() if np.isfinite(values[i])]
    ring = [i for i in scene.ring_indices() if np.isfinite(values[i])]
    if not interior or not ring:
        return False
    return bool(np.mean(values[ring]) > np.mean(values[interior]))


def eligible_patches(scene: SceneTrack, cfg: EstimatorConfig = EstimatorConfig()) -> EligibilityReport:
    """Run the full filter: per-patch entropy, max-gap split, camera check.

    Patches whose entropy estimation degenerates (zero k-NN distance) get
    a -inf sentinel and always land in the low set; they are exactly the
    static patches the filter exists to remove.
    """
    n = scene.n_patches
    entropies = np.empty(n)
    failed = []
    for i, traj in enumerate(scene.trajectories):
        try:
            entropies[i] = patch_entropy(traj, cfg)
        except ZeroDistanceError:
            entropies[i] = -np.inf
            failed.append(i)
    finite_idx = np.flatnonzero(np.isfinite(entropies))
    if finite_idx.size:
        high_local, low_local, threshold = max_gap_split(entropies[finite_idx])
        high = frozenset(int(finite_idx[i]) for i in high_local)
        low = frozenset(int(finite_idx[i]) for i in low_local) | frozenset(failed)
    else:
        high, low, threshold = frozenset(), frozenset(failed), None
    camera_moving = detect_camera_motion(scene, entropies)
    eligible = low if camera_moving else high
    return EligibilityReport(
        entropies=entropies,
        threshold=threshold,
        high_set=high,
        low_set=frozenset(low),
        camera_moving=camera_moving,
        eligible=frozenset(eligible),
        failed=tuple(failed),
    )
