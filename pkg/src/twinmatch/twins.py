"""Pairwise MI matrices, twin selection, and the twin-dictionary file.

For each scene, every unordered pair of eligible patches gets a mutual
information estimate between their 3-D trajectories; each patch's twin
is the eligible patch it shares the highest MI with. A random-twin
policy (seeded uniform draw from the other eligible patches) is kept as
the control. Ineligible patches receive no twin entry.

Twin-dictionary files are canonical UTF-8 JSON: keys sorted, floats with
17 significant digits, so identical inputs and seeds produce
byte-identical files regardless of processing order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .alignment import EligibilityReport, eligible_patches
from .errors import SceneFormatError, TwinMatchError
from .jsonio import dumps_canonical
from .knn_info import EstimatorConfig, ksg_mi
from .trajectory import SceneTrack

__all__ = [
    "POLICIES",
    "MIMatrix",
    "TwinEntry",
    "SceneTwins",
    "TwinDictionary",
    "mi_matrix",
    "select_twin",
    "build_twin_dictionary",
    "twin_dictionary_to_dict",
    "dumps_twin_dictionary",
    "load_twin_dictionary",
]

POLICIES = ("mi", "random")

_SENTINEL = -np.inf


@dataclass(frozen=True)
class MIMatrix:
    """Symmetric pairwise MI over one scene's patches, in nats.

    Rows/columns outside the eligible set, and the diagonal, hold -inf
    and are never read by selection.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.n, self.n):
            raise ValueError(f"values must be ({self.n}, {self.n}), got {vals.shape}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


class TwinEntry(NamedTuple):
    twin: int
    mi_nats: float | None  # None under the random policy


@dataclass(frozen=True)
class SceneTwins:
    video_id: str
    camera_moving: bool
    eligible: tuple[int, ...]
    twins: dict[int, TwinEntry]
    alignment: EligibilityReport | None = field(repr=False, default=None)
    skipped_reason: str | None = None


@dataclass(frozen=True)
class TwinDictionary:
    policy: str
    estimator: EstimatorConfig
    scenes: dict[str, SceneTwins]


def mi_matrix(
    scene: SceneTrack,
    eligible: Iterable[int],
    cfg: EstimatorConfig = EstimatorConfig(),
) -> MIMatrix:
    """Pairwise trajectory MI over the eligible set, mirrored exactly.

    Each unordered pair is computed once, so the matrix equals its
    transpose elementwise.
    """
    idx = sorted(set(int(i) for i in eligible))
    n = scene.n_patches
    if any(i < 0 or i >= n for i in idx):
        raise ValueError(f"eligible indices out of range for {n} patches: {idx}")
    if len(idx) < 2:
        raise TwinMatchError("scene has no twin candidates (fewer than 2 eligible patches)")
    values = np.full((n, n), _SENTINEL)
    points = [traj.points for traj in scene.trajectories]
    for a, i in enumerate(idx):
        for j in idx[a + 1:]:
            v = ksg_mi(points[i], points[j], cfg)
            values[i, j] = v
            values[j, i] = v
    return MIMatrix(n=n, values=values)


def select_twin(matrix: MIMatrix, i: int, eligible: Iterable[int]) -> int:
    """Index of the eligible patch sharing the highest MI with patch i.

    Ties break toward the smallest index.
    """
    members = sorted(set(int(j) for j in eligible))
    if i not in members:
        raise ValueError(f"patch {i} is not in the eligible set")
    if len(members) < 2:
        raise TwinMatchError("scene has no twin candidates (fewer than 2 eligible patches)")
    best = None
    best_value = -np.inf
    for j in members:
        if j == i:
            continue
        value = matrix.values[i, j]
        if best is None or value > best_value:
            best = j
            best_value = value
    return best


def _scene_rng(seed: int, video_id: str) -> np.random.Generator:
    # keyed by video_id so scene processing order cannot change the draws
    return np.random.default_rng([seed, zlib.crc32(video_id.encode("utf-8"))])


def build_twin_dictionary(
    scenes: Sequence[SceneTrack],
    cfg: EstimatorConfig = EstimatorConfig(),
    policy: str = "mi",
    seed: int = 0,
    use_filter: bool = True,
    threads: int = 1,
) -> TwinDictionary:
    """Run the eligibility filter and twin selection over a batch of scenes.

    One bad scene never aborts the batch: its failure is recorded in
    skipped_reason and processing continues. With use_filter off, every
    patch is treated as eligible (diagnostics mode). Scenes are
    independent, so threads > 1 distributes them over a thread pool;
    results are keyed by video_id and serialization order is canonical,
    so the output does not depend on the thread count.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    batch = list(scenes)
    seen: set[str] = set()
    for scene in batch:
        if scene.video_id in seen:
            raise ValueError(f"duplicate video_id {scene.video_id!r} in batch")
        seen.add(scene.video_id)

    def job(scene: SceneTrack) -> SceneTwins:
        try:
            return _scene_twins(scene, cfg, policy, seed, use_filter)
        except (TwinMatchError, ValueError) as exc:
            # scene-level failure (e.g. too few frames for the estimator)
            return SceneTwins(
                video_id=scene.video_id,
                camera_moving=False,
                eligible=(),
                twins={},
                alignment=None,
                skipped_reason=str(exc),
            )

    if threads > 1 and len(batch) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, batch))
    else:
        results = [job(s) for s in batch]
    return TwinDictionary(
        policy=policy,
        estimator=cfg,
        scenes={st.video_id: st for st in results},
    )


def _scene_twins(
    scene: SceneTrack,
    cfg: EstimatorConfig,
    policy: str,
    seed: int,
    use_filter: bool,
) -> SceneTwins:
    report = eligible_patches(scene, cfg)
    eligible = sorted(range(scene.n_patches)) if not use_filter else sorted(report.eligible)
    base = dict(
        video_id=scene.video_id,
        camera_moving=report.camera_moving,
        eligible=tuple(eligible),
        alignment=report,
    )
    if len(eligible) < 2:
        if not np.any(np.isfinite(report.entropies)):
            reason = "degenerate entropies"
        else:
            reason = "fewer than 2 eligible patches"
        return SceneTwins(twins={}, skipped_reason=reason, **base)
    twins: dict[int, TwinEntry] = {}
    if policy == "random":
        rng = _scene_rng(seed, scene.video_id)
        for i in eligible:
            candidates = [j for j in eligible if j != i]
            twins[i] = TwinEntry(twin=candidates[int(rng.integers(len(candidates)))], mi_nats=None)
        return SceneTwins(twins=twins, skipped_reason=None, **base)
    try:
        matrix = mi_matrix(scene, eligible, cfg)
    except TwinMatchError as exc:
        return SceneTwins(twins={}, skipped_reason=str(exc), **base)
    for i in eligible:
        j = select_twin(matrix, i, eligible)
        twins[i] = TwinEntry(twin=j, mi_nats=float(matrix.values[i, j]))
    return SceneTwins(twins=twins, skipped_reason=None, **base)


def _alignment_to_dict(report: EligibilityReport, filtered: bool) -> dict:
    return {
        "entropies": [float(e) if np.isfinite(e) else None for e in report.entropies],
        "threshold": report.threshold,
        "high": sorted(report.high_set),
        "low": sorted(report.low_set),
        "failed": list(report.failed),
        "filtered": filtered,
    }


def twin_dictionary_to_dict(twin_dict: TwinDictionary, use_filter: bool = True) -> dict:
    cfg = twin_dict.estimator
    scenes_doc = {}
    for video_id, st in twin_dict.scenes.items():
        entry = {
            "camera_moving": st.camera_moving,
            "eligible": list(st.eligible),
            "twins": {
                str(i): (
                    {"twin": te.twin, "mi_nats": te.mi_nats}
                    if te.mi_nats is not None
                    else {"twin": te.twin}
                )
                for i, te in st.twins.items()
            },
            "skipped_reason": st.skipped_reason,
        }
        if st.alignment is not None:
            entry["alignment"] = _alignment_to_dict(st.alignment, filtered=use_filter)
        scenes_doc[video_id] = entry
    return {
        "estimator": {
            "k": cfg.k,
            "variant": cfg.variant,
            "jitter": cfg.jitter,
            "min_samples": cfg.min_samples,
        },
        "policy": twin_dict.policy,
        "scenes": scenes_doc,
    }


def dumps_twin_dictionary(twin_dict: TwinDictionary, use_filter: bool = True) -> str:
    return dumps_canonical(twin_dictionary_to_dict(twin_dict, use_filter))


def _parse_alignment(doc: dict) -> EligibilityReport:
    entropies = np.array(
        [(-np.inf if e is None else float(e)) for e in doc["entropies"]], dtype=np.float64
    )
    camera = bool(doc.get("camera_moving", False))
    return EligibilityReport(
        entropies=entropies,
        threshold=doc["threshold"],
        high_set=frozenset(doc["high"]),
        low_set=frozenset(doc["low"]),
        camera_moving=camera,
        eligible=frozenset(doc.get("eligible", ())),
        failed=tuple(doc["failed"]),
    )


def load_twin_dictionary(source: bytes | str) -> TwinDictionary:
    """Parse a twin-dictionary file back into structured form."""
    import json

    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"invalid JSON: {exc}") from None
    for key in ("estimator", "policy", "scenes"):
        if key not in doc:
            raise SceneFormatError(f"missing key $.{key}")
    est = doc["estimator"]
    try:
        cfg = EstimatorConfig(
            k=est["k"], variant=est["variant"], jitter=est["jitter"],
            min_samples=est["min_samples"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"$.estimator invalid: {exc}") from None
    policy = doc["policy"]
    if policy not in POLICIES:
        raise SceneFormatError(f"$.policy must be one of {POLICIES}, got {policy!r}")
    scenes = {}
    for video_id, entry in doc["scenes"].items():
        path = f"$.scenes[{video_id!r}]"
        for key in ("camera_moving", "eligible", "twins", "skipped_reason"):
            if key not in entry:
                raise SceneFormatError(f"missing key {path}.{key}")
        twins = {}
        for key, te in entry["twins"].items():
            i = int(key)
            if "twin" not in te:
                raise SceneFormatError(f"missing key {path}.twins[{key}].twin")
            if te["twin"] == i:
                raise SceneFormatError(f"{path}.twins[{key}]: twin_index equals patch_index")
            twins[i] = TwinEntry(twin=int(te["twin"]), mi_nats=te.get("mi_nats"))
        eligible = tuple(int(i) for i in entry["eligible"])
        for i, te in twins.items():
            if te.twin not in eligible:
                raise SceneFormatError(
                    f"{path}.twins[{i}].twin = {te.twin} is not in the eligible set"
                )
        alignment = None
        if "alignment" in entry:
            adoc = dict(entry["alignment"])
            adoc.setdefault("camera_moving", entry["camera_moving"])
            adoc.setdefault("eligible", eligible)
            alignment = _parse_alignment(adoc)
        scenes[video_id] = SceneTwins(
            video_id=video_id,
            camera_moving=bool(entry["camera_moving"]),
            eligible=eligible,
            twins=twins,
            alignment=alignment,
            skipped_reason=entry["skipped_reason"],
        )
    return TwinDictionary(policy=policy, estimator=cfg, scenes=scenes)
