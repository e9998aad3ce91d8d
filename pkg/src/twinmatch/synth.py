"""Synthetic data with known ground truth.

Two generators: paired correlated Gaussians for validating the MI
estimator against the closed form -0.5*ln(1-rho^2), and full synthetic
scenes with planted twin structure for end-to-end validation.

Scene construction: each coupled pair shares a latent 3-D random walk;
member trajectories mix the shared walk with a private walk at weight
rho (variance-preserving, so MI rises monotonically with rho while the
motion scale stays fixed). Static patches sit at their grid cell with
small isotropic observation noise. Camera drift adds a common linear
path to every patch; in compensated mode the camera tracks the movers
instead, so movers show only a small residual and static patches appear
to move along the reversed drift, reproducing the flipped-eligibility
regime the entropy filter must handle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SceneFormatError
from .jsonio import dumps_canonical
from .trajectory import GridLayout, SceneTrack, Trajectory

__all__ = [
    "SceneSpec",
    "GroundTruth",
    "gen_correlated_gaussian",
    "gen_scene",
    "truth_to_dict",
    "dumps_truth",
    "load_truth",
]

_SPACING = 8.0       # grid cell pitch in scene units
_WALK_STEP = 1.0     # std of one random-walk increment
_RESIDUAL = 0.05     # tracking residual left on movers in compensated mode


def gen_correlated_gaussian(n: int, rho: float, seed: int):
    """n paired standard-normal draws with correlation rho.

    Analytic MI is -0.5*ln(1-rho^2) nats. Deterministic per seed.
    """
    if not (abs(rho) < 1):
        raise ValueError(f"|rho| must be < 1, got {rho}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    eps = rng.standard_normal(n)
    y = rho * x + np.sqrt(1.0 - rho * rho) * eps
    return x.reshape(-1, 1), y.reshape(-1, 1)


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for one synthetic scene.

    coupled_pairs lists (i, j, rho) with rho in [0, 1]; pair members are
    the planted movers. Remaining patches are static with probability
    static_fraction (deterministically, the lowest-indexed remainder
    become independent movers). camera_drift is the per-frame drift
    vector; (0,0,0) means a static camera. drift_compensated only
    applies with nonzero drift.
    """

    n_patches: int
    n_frames: int
    grid: GridLayout
    coupled_pairs: tuple = ()
    noise_sigma: float = 0.01
    static_fraction: float = 1.0
    camera_drift: tuple = (0.0, 0.0, 0.0)
    drift_compensated: bool = False
    seed: int = 0
    video_id: str = field(default="")

    def __post_init__(self):
        if self.n_patches != self.grid.n_patches:
            raise ValueError(
                f"n_patches {self.n_patches} != grid {self.grid.rows}x{self.grid.cols}"
            )
        if self.n_frames < 2:
            raise ValueError(f"n_frames must be >= 2, got {self.n_frames}")
        if not (self.noise_sigma > 0):
            raise ValueError(f"noise_sigma must be positive, got {self.noise_sigma}")
        if not (0.0 <= self.static_fraction <= 1.0):
            raise ValueError(f"static_fraction must lie in [0, 1], got {self.static_fraction}")
        drift = tuple(float(c) for c in self.camera_drift)
        if len(drift) != 3:
            raise ValueError(f"camera_drift must have 3 components, got {len(drift)}")
        object.__setattr__(self, "camera_drift", drift)
        pairs = tuple((int(i), int(j), float(r)) for i, j, r in self.coupled_pairs)
        seen: set[int] = set()
        for i, j, r in pairs:
            if i == j:
                raise ValueError(f"coupled pair ({i}, {j}) is degenerate")
            for m in (i, j):
                if not (0 <= m < self.n_patches):
                    raise ValueError(f"coupled index {m} out of range for {self.n_patches} patches")
                if m in seen:
                    raise ValueError(f"patch {m} appears in more than one coupled pair")
                seen.add(m)
            if not (0.0 <= r <= 1.0):
                raise ValueError(f"coupling rho must lie in [0, 1], got {r}")
        object.__setattr__(self, "coupled_pairs", pairs)
        if not self.video_id:
            object.__setattr__(self, "video_id", f"synth-{self.seed:05d}")

    @property
    def drifting(self) -> bool:
        return any(c != 0.0 for c in self.camera_drift)


@dataclass(frozen=True)
class GroundTruth:
    """Oracle labels for a generated scene."""

    twin_map: dict[int, int]
    camera_moving: bool
    mover_set: frozenset[int]


def _base_positions(grid: GridLayout) -> np.ndarray:
    rows, cols = np.divmod(np.arange(grid.n_patches), grid.cols)
    return np.column_stack([cols * _SPACING, rows * _SPACING, np.zeros_like(rows, float)])


def _walk(rng: np.random.Generator, n_frames: int) -> np.ndarray:
    return np.cumsum(rng.standard_normal((n_frames, 3)) * _WALK_STEP, axis=0)


def gen_scene(spec: SceneSpec) -> tuple[SceneTrack, GroundTruth]:
    """Generate one scene and its ground truth, deterministically per spec.

    Random draws happen in a fixed order (pair latents, then patches by
    index), so equal specs give bitwise-equal trajectories.
    """
    rng = np.random.default_rng(spec.seed)
    n, f = spec.n_patches, spec.n_frames
    base = _base_positions(spec.grid)

    coupled = {}
    twin_map: dict[int, int] = {}
    for i, j, rho in spec.coupled_pairs:
        latent = _walk(rng, f)
        mix = np.sqrt(max(0.0, 1.0 - rho * rho))
        coupled[i] = rho * latent + mix * _walk(rng, f)
        coupled[j] = rho * latent + mix * _walk(rng, f)
        twin_map[i] = j
        twin_map[j] = i

    rest = [p for p in range(n) if p not in coupled]
    n_free = len(rest) - int(round(spec.static_fraction * len(rest)))
    free_walkers = set(rest[:n_free])

    motion = np.zeros((n, f, 3))
    movers = set(coupled)
    for p in range(n):
        if p in coupled:
            motion[p] = coupled[p]
        elif p in free_walkers:
            motion[p] = _walk(rng, f)
            movers.add(p)

    drift_path = np.outer(np.arange(f), np.asarray(spec.camera_drift))
    observed = np.empty((n, f, 3))
    for p in range(n):
        noise = rng.standard_normal((f, 3)) * spec.noise_sigma
        if spec.drifting and spec.drift_compensated:
            if p in movers:
                observed[p] = base[p] + _RESIDUAL * motion[p] + noise
            else:
                observed[p] = base[p] - drift_path + noise
        else:
            observed[p] = base[p] + motion[p] + drift_path + noise

    scene = SceneTrack(
        video_id=spec.video_id,
        grid=spec.grid,
        frame_count=f,
        trajectories=tuple(
            Trajectory(patch_index=p, points=observed[p]) for p in range(n)
        ),
    )
    truth = GroundTruth(
        twin_map=twin_map,
        camera_moving=spec.drifting,
        mover_set=frozenset(movers),
    )
    return scene, truth


def truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "twin_map": {str(i): j for i, j in truth.twin_map.items()},
        "camera_moving": truth.camera_moving,
        "mover_set": sorted(truth.mover_set),
    }


def dumps_truth(truth: GroundTruth) -> str:
    return dumps_canonical(truth_to_dict(truth))


def load_truth(source: bytes | str) -> GroundTruth:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"invalid JSON: {exc}") from None
    for key in ("twin_map", "camera_moving", "mover_set"):
        if key not in doc:
            raise SceneFormatError(f"missing key $.{key}")
    twin_map = {int(k): int(v) for k, v in doc["twin_map"].items()}
    for i, j in twin_map.items():
        if twin_map.get(j) != i:
            raise SceneFormatError(f"$.twin_map is not symmetric at {i} -> {j}")
    return GroundTruth(
        twin_map=twin_map,
        camera_moving=bool(doc["camera_moving"]),
        mover_set=frozenset(int(i) for i in doc["mover_set"]),
    )
