"""Command-line surface: estimate, twins, synth, bench.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
malformed input, no usable scenes), 3 numeric error (zero k-NN distance
with jitter disabled). Error messages go to standard error; outputs are
JSON (or a bare number for estimate) with canonical formatting so equal
inputs and seeds give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from .errors import SceneFormatError, ZeroDistanceError
from .jsonio import dumps_canonical
from .knn_info import VARIANTS, EstimatorConfig, ksg_mi
from .synth import SceneSpec, dumps_truth, gen_scene
from .trajectory import GridLayout, load_scene_file, dumps_scene
from .twins import POLICIES, SceneTwins, build_twin_dictionary, dumps_twin_dictionary

USAGE_ERROR = 1
DATA_ERROR = 2
NUMERIC_ERROR = 3

_BENCH_BOUND_SECONDS = 2.0


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the declared mapping reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _estimator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, default=3, help="number of nearest neighbors (default 3)")
    parser.add_argument(
        "--variant", choices=VARIANTS, default="dimensioned-3kl",
        help="MI estimator variant (default dimensioned-3kl)",
    )
    parser.add_argument(
        "--jitter", type=float, default=None, metavar="SCALE",
        help="break ties by adding deterministic noise of this relative scale (default off)",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for seeded subcommands")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twinmatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_est = sub.add_parser("estimate",
                           help="mutual information between two sample files")
    _estimator_flags(p_est)
    p_est.add_argument("--x", required=True, help="JSON file with samples (array or array of arrays)")
    p_est.add_argument("--y", required=True, help="JSON file with paired samples")
    p_est.set_defaults(func=cmd_estimate)

    p_tw = sub.add_parser("twins",
                          help="build a twin dictionary from scene files")
    _estimator_flags(p_tw)
    p_tw.add_argument("--input", required=True, help="scene file or directory of scene files")
    p_tw.add_argument("--policy", choices=POLICIES, default="mi",
                      help="twin selection policy (default mi)")
    p_tw.add_argument("--no-filter", action="store_true",
                      help="skip the entropy eligibility filter (diagnostics)")
    p_tw.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                      help="scene-level worker threads (default: available cores)")
    p_tw.add_argument("--output", help="output file (default: standard output)")
    p_tw.set_defaults(func=cmd_twins)

    p_sy = sub.add_parser("synth",
                          help="generate synthetic scenes with ground-truth sidecars")
    _estimator_flags(p_sy)
    p_sy.add_argument("--output-dir", required=True)
    p_sy.add_argument("--scenes", type=int, default=1, help="number of scenes (default 1)")
    p_sy.add_argument("--rows", type=int, default=5)
    p_sy.add_argument("--cols", type=int, default=8)
    p_sy.add_argument("--frames", type=int, default=50)
    p_sy.add_argument("--pairs", type=int, default=5, help="planted coupled pairs (default 5)")
    p_sy.add_argument("--rho", type=float, default=0.95, help="pair coupling in [0,1] (default 0.95)")
    p_sy.add_argument("--noise", type=float, default=0.01, help="observation noise sigma (default 0.01)")
    p_sy.add_argument("--static-fraction", type=float, default=1.0,
                      help="fraction of non-coupled patches kept static (default 1.0)")
    p_sy.add_argument("--drift", default="0,0,0", metavar="VX,VY,VZ",
                      help="per-frame camera drift vector (default 0,0,0)")
    p_sy.add_argument("--compensated", action="store_true",
                      help="camera tracks the movers (flipped-eligibility regime)")
    p_sy.set_defaults(func=cmd_synth)

    p_be = sub.add_parser("bench",
                          help="time full pairwise MI on one synthetic scene")
    _estimator_flags(p_be)
    p_be.add_argument("--patches", type=int, default=40)
    p_be.add_argument("--frames", type=int, default=50)
    p_be.add_argument("--repeats", type=int, default=3, help="median over this many runs (default 3)")
    p_be.add_argument("--output", help="report file (default: standard output)")
    p_be.set_defaults(func=cmd_bench)

    return parser


def _config_from_args(args) -> EstimatorConfig:
    try:
        return EstimatorConfig(k=args.k, variant=args.variant, jitter=args.jitter)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


class UsageError(Exception):
    pass


def _load_samples(path: str) -> np.ndarray:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneFormatError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: invalid JSON: {exc}") from None
    try:
        arr = np.asarray(doc, dtype=np.float64)
    except (TypeError, ValueError):
        raise SceneFormatError(f"{path}: expected an array of numbers or of equal-length rows")
    if arr.ndim not in (1, 2) or arr.size == 0:
        raise SceneFormatError(f"{path}: expected a 1-D or 2-D numeric array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SceneFormatError(f"{path}: samples contain non-finite values")
    return arr


def cmd_estimate(args) -> int:
    cfg = _config_from_args(args)
    x = _load_samples(args.x)
    y = _load_samples(args.y)
    try:
        mi = ksg_mi(x, y, cfg)
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from None
    print(f"{mi:.6f}")
    return 0


def _scene_paths(root: Path) -> list[Path]:
    if root.is_dir():
        # truth sidecars produced by synth live next to scene files
        return sorted(p for p in root.glob("*.json") if not p.name.endswith(".truth.json"))
    return [root]


def cmd_twins(args) -> int:
    cfg = _config_from_args(args)
    if args.threads < 1:
        raise UsageError(f"--threads must be >= 1, got {args.threads}")
    root = Path(args.input)
    if not root.exists():
        raise SceneFormatError(f"input path does not exist: {root}")
    paths = _scene_paths(root)
    if not paths:
        raise SceneFormatError(f"no scene files found under {root}")
    scenes = []
    unreadable: dict[str, SceneTwins] = {}
    for path in paths:
        try:
            scenes.append(load_scene_file(path))
        except SceneFormatError as exc:
            # a corrupt file is one failed scene, not a failed batch
            stem = path.name[: -len(".json")] if path.name.endswith(".json") else path.name
            unreadable[stem] = SceneTwins(
                video_id=stem, camera_moving=False, eligible=(), twins={},
                alignment=None, skipped_reason=str(exc),
            )
    twin_dict = build_twin_dictionary(
        scenes, cfg, policy=args.policy, seed=args.seed,
        use_filter=not args.no_filter, threads=args.threads,
    )
    for stem, st in unreadable.items():
        if stem not in twin_dict.scenes:
            twin_dict.scenes[stem] = st
    text = dumps_twin_dictionary(twin_dict, use_filter=not args.no_filter)
    if all(st.skipped_reason is not None for st in twin_dict.scenes.values()):
        sys.stderr.write("twinmatch: every scene failed\n")
        _emit(text, args.output)
        return DATA_ERROR
    _emit(text, args.output)
    return 0


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_drift(raw: str) -> tuple[float, float, float]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise UsageError(f"--drift expects VX,VY,VZ, got {raw!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--drift components must be numbers, got {raw!r}") from None


def _interior_pairs(grid: GridLayout, n_pairs: int, rho: float) -> tuple:
    interior = [
        i for i in range(grid.n_patches)
        if 0 < i // grid.cols < grid.rows - 1 and 0 < i % grid.cols < grid.cols - 1
    ]
    if len(interior) < 2 * n_pairs:
        raise UsageError(
            f"grid {grid.rows}x{grid.cols} has {len(interior)} interior cells; "
            f"{2 * n_pairs} needed for {n_pairs} pairs"
        )
    return tuple(
        (interior[2 * m], interior[2 * m + 1], rho) for m in range(n_pairs)
    )


def cmd_synth(args) -> int:
    if args.scenes < 1:
        raise UsageError(f"--scenes must be >= 1, got {args.scenes}")
    drift = _parse_drift(args.drift)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        grid = GridLayout(rows=args.rows, cols=args.cols)
        pairs = _interior_pairs(grid, args.pairs, args.rho)
        for offset in range(args.scenes):
            spec = SceneSpec(
                n_patches=grid.n_patches,
                n_frames=args.frames,
                grid=grid,
                coupled_pairs=pairs,
                noise_sigma=args.noise,
                static_fraction=args.static_fraction,
                camera_drift=drift,
                drift_compensated=args.compensated,
                seed=args.seed + offset,
            )
            scene, truth = gen_scene(spec)
            (out_dir / f"{scene.video_id}.json").write_text(dumps_scene(scene), encoding="utf-8")
            (out_dir / f"{scene.video_id}.truth.json").write_text(dumps_truth(truth), encoding="utf-8")
            print(scene.video_id)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return 0


def _bench_grid(n_patches: int) -> GridLayout:
    rows = int(np.sqrt(n_patches))
    while rows > 1 and n_patches % rows:
        rows -= 1
    return GridLayout(rows=rows, cols=n_patches // rows)


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise UsageError(f"--repeats must be >= 1, got {args.repeats}")
    if args.patches < 2:
        raise UsageError(f"--patches must be >= 2 to form pairs, got {args.patches}")
    cfg = _config_from_args(args)
    try:
        grid = _bench_grid(args.patches)
        spec = SceneSpec(
            n_patches=args.patches, n_frames=args.frames, grid=grid,
            static_fraction=0.0, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    scene, _ = gen_scene(spec)
    points = [t.points for t in scene.trajectories]
    n = len(points)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    times = []
    for _ in range(args.repeats):
        start = time.perf_counter()
        for i, j in pairs:
            ksg_mi(points[i], points[j], cfg)
        times.append(time.perf_counter() - start)
    wall = float(np.median(times))
    report = {
        "n_patches": n,
        "n_frames": args.frames,
        "n_pairs": len(pairs),
        "k": cfg.k,
        "variant": cfg.variant,
        "repeats": args.repeats,
        "wall_seconds": wall,
        "per_pair_us": wall / len(pairs) * 1e6,
        "bound_seconds": _BENCH_BOUND_SECONDS,
        "passed": wall < _BENCH_BOUND_SECONDS,
        "host": f"{platform.machine()} {platform.system()}, single thread",
    }
    _emit(dumps_canonical(report), args.output)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"twinmatch: {exc}\n")
        return USAGE_ERROR
    except (SceneFormatError, FileNotFoundError, IsADirectoryError) as exc:
        sys.stderr.write(f"twinmatch: {exc}\n")
        return DATA_ERROR
    except ZeroDistanceError as exc:
        sys.stderr.write(f"twinmatch: {exc}\n")
        return NUMERIC_ERROR
    except ValueError as exc:
        sys.stderr.write(f"twinmatch: {exc}\n")
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
