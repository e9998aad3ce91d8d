"""Scene/trajectory data model and scene-file ingestion.

A scene is the tracked output for one video: the first frame is sliced
into a rows x cols patch grid (row-major, top-left origin), each patch's
representative point is tracked across F frames, and a per-frame depth
value is fused with the 2-D track into (x, y, z) observations. Depth is
used raw, as exported: z is an opaque monotone depth coordinate.

Scene files are UTF-8 JSON::

    {"video_id": str, "grid": {"rows": int, "cols": int},
     "frame_count": int,
     "trajectories": [{"patch_index": int, "points": [[x, y, z], ...]}]}

A trajectory entry may instead carry ``"points2d": [[x, y], ...]`` plus
``"depth": [z, ...]``; the loader fuses them. All numbers must be finite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import SceneFormatError
from .jsonio import dumps_canonical

__all__ = [
    "Point3",
    "Trajectory",
    "GridLayout",
    "SceneTrack",
    "fuse_depth",
    "load_scene",
    "load_scene_file",
    "ring_membership",
    "scene_to_dict",
    "dumps_scene",
]


class Point3(NamedTuple):
    """One observation of a representative point: image x, y plus depth z."""

    x: float
    y: float
    z: float


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def fuse_depth(track2d, depth) -> np.ndarray:
    """Pair an (F, 2) pixel track with F depth values into (F, 3) points.

    Order is preserved; component (x, y) of the result equals the input
    track exactly and component z equals the depth sequence exactly.
    """
    t = np.asarray(track2d, dtype=np.float64)
    d = np.asarray(depth, dtype=np.float64)
    if t.ndim != 2 or t.shape[1] != 2:
        raise ValueError(f"track2d must have shape (F, 2), got {t.shape}")
    if d.ndim != 1:
        raise ValueError(f"depth must be a flat sequence, got shape {d.shape}")
    if t.shape[0] != d.shape[0]:
        raise ValueError(
            f"length mismatch: track2d has {t.shape[0]} frames, depth has {d.shape[0]}"
        )
    if t.shape[0] < 1:
        raise ValueError("need at least one frame, got empty input")
    for name, arr in (("track2d", t), ("depth", d)):
        if not np.all(np.isfinite(arr)):
            idx = int(np.argwhere(~np.isfinite(arr).reshape(arr.shape[0], -1).all(axis=1))[0][0])
            raise ValueError(f"non-finite value in {name} at frame {idx}")
    return np.column_stack([t, d])


@dataclass(frozen=True)
class Trajectory:
    """Ordered 3-D observation sequence of one patch's representative point."""

    patch_index: int
    points: np.ndarray  # (F, 3) float64, read-only

    def __post_init__(self):
        if self.patch_index < 0:
            raise ValueError(f"patch_index must be >= 0, got {self.patch_index}")
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (F, 3), got {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("trajectory must contain at least one frame")
        if not np.all(np.isfinite(pts)):
            idx = int(np.argwhere(~np.isfinite(pts).all(axis=1))[0][0])
            raise ValueError(f"non-finite point at frame {idx}")
        object.__setattr__(self, "points", _freeze(pts))

    @property
    def frame_count(self) -> int:
        return self.points.shape[0]

    def point(self, frame: int) -> Point3:
        return Point3(*self.points[frame])


@dataclass(frozen=True)
class GridLayout:
    """Patch grid of the first frame; rows x cols cells, row-major indexing."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must have rows >= 1 and cols >= 1, got {self.rows}x{self.cols}")

    @property
    def n_patches(self) -> int:
        return self.rows * self.cols


def ring_membership(grid: GridLayout, patch_index: int) -> bool:
    """True iff the patch's cell touches the image border (outermost ring)."""
    if not 0 <= patch_index < grid.n_patches:
        raise ValueError(
            f"patch_index {patch_index} out of range for {grid.rows}x{grid.cols} grid"
        )
    row, col = divmod(patch_index, grid.cols)
    return row in (0, grid.rows - 1) or col in (0, grid.cols - 1)


@dataclass(frozen=True)
class SceneTrack:
    """All N patch trajectories of one video, with grid geometry."""

    video_id: str
    grid: GridLayout
    frame_count: int
    trajectories: tuple[Trajectory, ...] = field(repr=False)

    def __post_init__(self):
        trajs = tuple(self.trajectories)
        object.__setattr__(self, "trajectories", trajs)
        n = self.grid.n_patches
        if len(trajs) != n:
            raise ValueError(
                f"grid/N mismatch: grid {self.grid.rows}x{self.grid.cols} implies "
                f"{n} patches but {len(trajs)} trajectories given"
            )
        for pos, traj in enumerate(trajs):
            if traj.patch_index != pos:
                raise ValueError(
                    f"trajectories must be sorted by patch_index 0..{n - 1} with no gaps; "
                    f"position {pos} holds patch_index {traj.patch_index}"
                )
            if traj.frame_count != self.frame_count:
                raise ValueError(
                    f"ragged lengths: trajectory {pos} has {traj.frame_count} frames, "
                    f"scene frame_count is {self.frame_count}"
                )
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")

    @property
    def n_patches(self) -> int:
        return self.grid.n_patches

    def as_array(self) -> np.ndarray:
        """Stacked (N, F, 3) view of all trajectories."""
        return np.stack([t.points for t in self.trajectories])

    def ring_indices(self) -> list[int]:
        return [i for i in range(self.n_patches) if ring_membership(self.grid, i)]

    def interior_indices(self) -> list[int]:
        return [i for i in range(self.n_patches) if not ring_membership(self.grid, i)]


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise SceneFormatError(f"missing key {path}.{key}")
    value = doc[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SceneFormatError(f"{path}.{key} must be a number, got {type(value).__name__}")
    elif kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SceneFormatError(f"{path}.{key} must be an integer, got {type(value).__name__}")
    elif not isinstance(value, kind):
        raise SceneFormatError(
            f"{path}.{key} must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _numeric_array(raw, shape_desc: str, path: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SceneFormatError(f"{path} is not a numeric array: {exc}") from None
    if not np.all(np.isfinite(arr)):
        idx = np.argwhere(~np.isfinite(arr))[0]
        loc = "".join(f"[{int(i)}]" for i in idx)
        raise SceneFormatError(f"non-finite number at {path}{loc}")
    return arr


def _standardize(scene: SceneTrack) -> SceneTrack:
    stacked = scene.as_array().reshape(-1, 3)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    return SceneTrack(
        scene.video_id,
        scene.grid,
        scene.frame_count,
        tuple(
            Trajectory(t.patch_index, (t.points - mean) / scale)
            for t in scene.trajectories
        ),
    )


def load_scene(source: bytes | str, standardize: bool = False) -> SceneTrack:
    """Parse and fully validate a scene-file document.

    Every invariant of SceneTrack is enforced; violations raise
    SceneFormatError with a path to the offending field. standardize
    rescales each axis to zero mean, unit variance over the whole scene;
    it defaults off because marginal rescaling changes entropy estimates.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SceneFormatError(f"top-level document must be an object, got {type(doc).__name__}")

    video_id = _require(doc, "video_id", str, "$")
    grid_doc = _require(doc, "grid", dict, "$")
    rows = _require(grid_doc, "rows", int, "$.grid")
    cols = _require(grid_doc, "cols", int, "$.grid")
    frame_count = _require(doc, "frame_count", int, "$")
    traj_docs = _require(doc, "trajectories", list, "$")

    try:
        grid = GridLayout(rows, cols)
    except ValueError as exc:
        raise SceneFormatError(f"$.grid: {exc}") from None

    trajectories = []
    for pos, entry in enumerate(traj_docs):
        path = f"$.trajectories[{pos}]"
        if not isinstance(entry, dict):
            raise SceneFormatError(f"{path} must be an object, got {type(entry).__name__}")
        patch_index = _require(entry, "patch_index", int, path)
        if "points" in entry:
            pts = _numeric_array(entry["points"], "(F, 3)", f"{path}.points")
            if pts.ndim != 2 or pts.shape[1] != 3:
                raise SceneFormatError(
                    f"{path}.points must be an array of [x, y, z] triples, got shape {pts.shape}"
                )
        elif "points2d" in entry:
            p2 = _numeric_array(entry["points2d"], "(F, 2)", f"{path}.points2d")
            if p2.ndim != 2 or p2.shape[1] != 2:
                raise SceneFormatError(
                    f"{path}.points2d must be an array of [x, y] pairs, got shape {p2.shape}"
                )
            depth = _numeric_array(_require(entry, "depth", list, path), "(F,)", f"{path}.depth")
            if depth.ndim != 1:
                raise SceneFormatError(f"{path}.depth must be a flat array, got shape {depth.shape}")
            try:
                pts = fuse_depth(p2, depth)
            except ValueError as exc:
                raise SceneFormatError(f"{path}: {exc}") from None
        else:
            raise SceneFormatError(f"{path} needs either 'points' or 'points2d' + 'depth'")
        try:
            trajectories.append(Trajectory(patch_index, pts))
        except ValueError as exc:
            raise SceneFormatError(f"{path}: {exc}") from None

    try:
        scene = SceneTrack(video_id, grid, frame_count, tuple(trajectories))
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from None
    return _standardize(scene) if standardize else scene


def load_scene_file(path: str | Path, standardize: bool = False) -> SceneTrack:
    return load_scene(Path(path).read_bytes(), standardize=standardize)


def scene_to_dict(scene: SceneTrack) -> dict:
    return {
        "video_id": scene.video_id,
        "grid": {"rows": scene.grid.rows, "cols": scene.grid.cols},
        "frame_count": scene.frame_count,
        "trajectories": [
            {"patch_index": t.patch_index, "points": [list(map(float, p)) for p in t.points]}
            for t in scene.trajectories
        ],
    }


def dumps_scene(scene: SceneTrack) -> str:
    """Canonical scene-file text; round-trips losslessly through load_scene."""
    return dumps_canonical(scene_to_dict(scene))
