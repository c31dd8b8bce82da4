"""Command line for the toy trainer: run a manifest's schedule end to end."""

from __future__ import annotations

import argparse
import sys

from .model import ModelPreset
from .train import TrainRun, train

PRESETS = {
    "tiny": ModelPreset(layers=2, width=128, heads=4),
    "micro": ModelPreset(layers=1, width=64, heads=2),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toytrainer",
        description="train a tiny masked LM over a currikit shard manifest",
    )
    parser.add_argument("--manifest", required=True, help="path to manifest.json")
    parser.add_argument("--out-dir", required=True, help="where losses.csv/consumed.csv go")
    parser.add_argument("--preset", choices=sorted(PRESETS), default="tiny")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--steps-per-phase", type=int, default=None)
    parser.add_argument("--embeddings", help="transferred embedding file for the token table")
    parser.add_argument("--lr", type=float, default=None, help="override manifest learning rate")
    parser.add_argument("--batch-size", type=int, default=None, help="override manifest batch size")
    parser.add_argument("--log-interval", type=int, default=5)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    run = TrainRun(
        plan_path=args.manifest,
        preset=PRESETS[args.preset],
        steps_per_phase=args.steps_per_phase,
        seed=args.seed,
        embeddings_path=args.embeddings,
        log_interval=args.log_interval,
        learning_rate=args.lr,
        batch_size=args.batch_size,
    )
    try:
        train(run, args.out_dir)
    except Exception as exc:  # noqa: BLE001
        print(f"toytrainer: error: {exc}", file=sys.stderr)
        return 1
    if run.loss_log:
        first = run.loss_log[0][3]
        last = run.loss_log[-1][3]
        print(f"steps\t{len(run.loss_log)}\tfirst_loss\t{first:.4f}\tlast_loss\t{last:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
