"""File-in, file-out entry point.

Reads a twin-dictionary JSON, trains on the synthetic two-cluster set
derived from it, and writes a training-log JSON with per-step losses
and the twin-alignment evaluation. Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .config import TrainerConfig
from .data import dataset_from_twin_file
from .train import evaluate_twin_alignment, train

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trainer-demo", description=__doc__.splitlines()[0])
    parser.add_argument("--twins", required=True, help="twin-dictionary JSON file")
    parser.add_argument("--output", help="training-log file (default: standard output)")
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0,
                        help="twin-branch weight (default 1)")
    parser.add_argument("--temperature", type=float, default=0.1)
    parser.add_argument("--learning-rate", type=float, default=0.02)
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--encoder-width", type=int, default=16)
    parser.add_argument("--head-depth", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--single-branch", action="store_true",
                        help="share one projection head between the branches")
    parser.add_argument("--dim", type=int, default=8, help="synthetic vector dimension")
    parser.add_argument("--separation", type=float, default=6.0)
    parser.add_argument("--spread", type=float, default=1.5)
    return parser


def log_to_dict(cfg: TrainerConfig, log, twin_cos: float, random_cos: float) -> dict:
    return {
        "config": asdict(cfg),
        "n_items": len(log.keys),
        "steps": [
            {"step": r.step, "l_view": r.l_view, "l_twin": r.l_twin, "combined": r.combined}
            for r in log.records
        ],
        "evaluation": {"twin_cosine": twin_cos, "random_cosine": random_cos},
    }


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        cfg = TrainerConfig(
            lam=args.lam, temperature=args.temperature,
            learning_rate=args.learning_rate, steps=args.steps,
            batch_size=args.batch_size, encoder_width=args.encoder_width,
            head_depth=args.head_depth, seed=args.seed,
            single_branch=args.single_branch,
        )
    except ValueError as exc:
        sys.stderr.write(f"trainer-demo: {exc}\n")
        return USAGE_ERROR
    try:
        text = Path(args.twins).read_text(encoding="utf-8")
    except OSError as exc:
        sys.stderr.write(f"trainer-demo: cannot read {args.twins}: {exc}\n")
        return DATA_ERROR
    try:
        dataset = dataset_from_twin_file(
            text, dim=args.dim, separation=args.separation,
            spread=args.spread, seed=cfg.seed,
        )
        log = train(dataset, cfg)
    except ValueError as exc:
        sys.stderr.write(f"trainer-demo: {exc}\n")
        return DATA_ERROR
    twin_cos, random_cos = evaluate_twin_alignment(log.embeddings, dataset, seed=cfg.seed)
    out = json.dumps(log_to_dict(cfg, log, twin_cos, random_cos), sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
        sys.stderr.write(
            f"trainer-demo: {cfg.steps} steps, combined "
            f"{log.records[0].combined:.4f} -> {log.records[-1].combined:.4f}, "
            f"twin cos {twin_cos:.3f} vs random {random_cos:.3f}\n"
        )
    else:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
