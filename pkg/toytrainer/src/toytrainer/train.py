"""Execute the staged, phase-unlocked schedule from a shard manifest.

Stages run in manifest order; within a stage each phase trains for
``epochs_per_phase`` epochs over the phase's unlocked chunk set only (the
nested shard listing from the manifest).  Losses land in a CSV with columns
(stage, phase, step, loss); consumed chunk ids land in a companion CSV
(stage, phase, step, chunk_id) so data discipline is checkable from logs
alone.  Masking is deterministic per (seed, stage, phase, epoch, step).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import Plan, load_plan, read_embedding_file
from .masking import IGNORE_INDEX, mask_batch
from .model import TINY, ModelPreset, TinyMaskedLM


@dataclass
class TrainRun:
    plan_path: str
    preset: ModelPreset = TINY
    steps_per_phase: int | None = None  # cap, None = full epochs
    seed: int = 0
    embeddings_path: str | None = None
    log_interval: int = 5
    learning_rate: float | None = None  # None = manifest value
    batch_size: int | None = None
    loss_log: list[tuple[int, int, int, float]] = field(default_factory=list)


def _lr_at(step: int, total: int, base_lr: float, warmup_steps: int) -> float:
    warmup = max(1, min(warmup_steps, total // 10))
    if step < warmup:
        return base_lr * (step + 1) / warmup
    return base_lr


def train(run: TrainRun, out_dir: str | Path) -> Plan:
    """Train per the manifest schedule; writes losses.csv and consumed.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan = load_plan(run.plan_path, verify_digests=True)

    hp = plan.hyperparameters
    base_lr = run.learning_rate if run.learning_rate is not None else float(hp["learning_rate"])
    batch_size = run.batch_size if run.batch_size is not None else int(hp["batch_size"])
    masking_rate = float(hp["masking_rate"])
    weight_decay = float(hp["decay"])
    warmup_steps = int(hp["warmup_steps"])

    torch.manual_seed(run.seed)
    model = TinyMaskedLM(plan.vocab_size, run.preset)
    if run.embeddings_path:
        _, rows = read_embedding_file(run.embeddings_path)
        model.load_transferred_embeddings(rows)
    if hp.get("optimizer", "AdamW") != "AdamW":
        raise ValueError(f"unsupported optimizer {hp.get('optimizer')!r}")
    optimizer = torch.optim.AdamW(model.parameters(), lr=base_lr, weight_decay=weight_decay)
    criterion = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)

    total_steps = 0
    for stage in plan.stages:
        for phase in stage.phases:
            epochs = stage.epochs_per_phase
            steps = (len(phase.chunk_ids) + batch_size - 1) // batch_size * epochs
            if run.steps_per_phase is not None:
                steps = min(steps, run.steps_per_phase)
            total_steps += steps

    loss_file = open(out / "losses.csv", "w", encoding="utf-8", newline="")
    consumed_file = open(out / "consumed.csv", "w", encoding="utf-8", newline="")
    loss_writer = csv.writer(loss_file)
    consumed_writer = csv.writer(consumed_file)
    loss_writer.writerow(["stage", "phase", "step", "loss"])
    consumed_writer.writerow(["stage", "phase", "step", "chunk_id"])

    global_step = 0
    try:
        for stage_idx, stage in enumerate(plan.stages):
            for phase in stage.phases:
                count = len(phase.chunk_ids)
                if count == 0:
                    continue
                step_in_phase = 0
                done = False
                for epoch in range(stage.epochs_per_phase):
                    order_rng = np.random.default_rng(
                        (run.seed, stage_idx, phase.phase, epoch)
                    )
                    order = order_rng.permutation(count)
                    for lo in range(0, count, batch_size):
                        if (
                            run.steps_per_phase is not None
                            and step_in_phase >= run.steps_per_phase
                        ):
                            done = True
                            break
                        rows = order[lo : lo + batch_size]
                        batch = phase.chunks[rows]
                        mask_seed = 0
                        for part in (run.seed, stage_idx, phase.phase, epoch, lo):
                            mask_seed = (mask_seed * 1000003 + part) & 0x7FFFFFFF
                        inputs, labels = mask_batch(
                            batch, plan.vocab_size, rate=masking_rate, seed=mask_seed
                        )
                        lr = _lr_at(global_step, total_steps, base_lr, warmup_steps)
                        for group in optimizer.param_groups:
                            group["lr"] = lr
                        logits = model(torch.from_numpy(inputs))
                        loss = criterion(
                            logits.reshape(-1, plan.vocab_size),
                            torch.from_numpy(labels).reshape(-1),
                        )
                        optimizer.zero_grad()
                        loss.backward()
                        optimizer.step()

                        for row in rows:
                            consumed_writer.writerow(
                                [stage.context_size, phase.phase, step_in_phase, phase.chunk_ids[row]]
                            )
                        if step_in_phase % run.log_interval == 0:
                            value = float(loss.item())
                            run.loss_log.append(
                                (stage.context_size, phase.phase, step_in_phase, value)
                            )
                            loss_writer.writerow(
                                [stage.context_size, phase.phase, step_in_phase, f"{value:.6f}"]
                            )
                        step_in_phase += 1
                        global_step += 1
                    if done:
                        break
    finally:
        loss_file.close()
        consumed_file.close()
    return plan
