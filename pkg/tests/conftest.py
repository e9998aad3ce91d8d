import numpy as np

from twinmatch import GridLayout, SceneTrack, Trajectory


def walk(rng: np.random.Generator, frames: int, step: float = 1.0) -> np.ndarray:
    """3-D random walk, (frames, 3)."""
    return np.cumsum(rng.standard_normal((frames, 3)) * step, axis=0)


def build_scene(video_id: str, grid: GridLayout, points_list) -> SceneTrack:
    """Assemble a SceneTrack from raw (F, 3) arrays in patch order."""
    trajs = tuple(Trajectory(i, pts) for i, pts in enumerate(points_list))
    return SceneTrack(video_id, grid, trajs[0].frame_count, trajs)
