"""Training protocol and evaluation loop.

One logical thread owns the optimizer and weights. Per epoch: seeded
shuffle into batches, per-sample augmentation, resize + normalize,
forward, BCE on logits, AdamW update; then validation metrics at
threshold 0.5, a plateau step on the validation Dice, and a checkpoint
whenever the validation IoU improves. Every epoch appends one NDJSON
record to the run log.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .augment import AugmentConfig, augment_pair
from .errors import ConfigError, ContractError, InferenceError
from .metrics import MetricsReport, compute_micro_metrics
from .models import Network, build_model
from .preprocess import normalize_image, resize_pair
from .weights import load_weights, save_weights


def bce_loss(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean binary cross entropy on raw logits, in the stable form
    max(z,0) - z*t + log(1 + exp(-|z|))."""
    if logits.shape != targets.shape:
        raise ContractError(
            f"logits shape {tuple(logits.shape)} != targets {tuple(targets.shape)}"
        )
    z = logits
    t = targets.to(z.dtype)
    loss = torch.clamp(z, min=0) - z * t + torch.log1p(torch.exp(-torch.abs(z)))
    return loss.mean()


@dataclass
class SchedulerState:
    current_lr: float
    best_metric: float = -math.inf
    epochs_since_improvement: int = 0


def scheduler_step(
    state: SchedulerState,
    val_dsc: float,
    factor: float = 0.1,
    patience: int = 10,
    min_lr: float = 1e-6,
    eps: float = 1e-6,
) -> SchedulerState:
    """Reduce-on-plateau: after patience+1 epochs without improvement the
    learning rate is multiplied by `factor`, never dropping below min_lr."""
    if val_dsc > state.best_metric + eps:
        state.best_metric = val_dsc
        state.epochs_since_improvement = 0
        return state
    state.epochs_since_improvement += 1
    if state.epochs_since_improvement > patience:
        state.current_lr = max(state.current_lr * factor, min_lr)
        state.epochs_since_improvement = 0
    return state


@dataclass
class TrainConfig:
    variant: str
    lr0: float = 1e-4
    batch_size: int = 4
    epochs: int = 200
    min_lr: float = 1e-6
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    scheduler_factor: float = 0.1
    scheduler_patience: int = 10
    resize: int = 512
    seed: int = 0
    augment: AugmentConfig | None = field(default_factory=AugmentConfig)
    init_weights: str | None = None
    max_steps: int | None = None      # cap on optimizer updates (smoke runs)
    val_interval: int = 1             # validate every N epochs
    data_root: str | None = None
    manifest: str | None = None

    def __post_init__(self):
        if not self.lr0 > self.min_lr > 0:
            raise ConfigError(f"need lr0 > min_lr > 0, got {self.lr0}, {self.min_lr}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")


@dataclass
class Checkpoint:
    epoch: int
    path: Path
    val_iou: float
    val_dsc: float
    lr: float


@dataclass
class TrainResult:
    run_dir: Path
    network: Network
    epoch_records: list[dict]
    step_losses: list[float]
    best: Checkpoint | None


def _batch_tensors(pairs, indices, config, epoch):
    images, masks = [], []
    for j, idx in enumerate(indices):
        image, mask = pairs[idx]
        if config.augment is not None:
            rng = np.random.default_rng([config.seed, epoch, int(idx)])
            image, mask = augment_pair(image, mask, config.augment, rng)
        image, mask = resize_pair(image, mask, config.resize)
        images.append(normalize_image(image))
        masks.append(torch.from_numpy(mask.astype(np.float32))[None])
    return torch.stack(images), torch.stack(masks)


def evaluate(
    network: Network,
    pairs,
    threshold: float = 0.5,
    resize: int = 512,
    batch_size: int = 4,
) -> MetricsReport:
    """Resize, normalize, forward, sigmoid >= threshold, micro counts."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("cannot evaluate an empty split")
    network.eval()
    preds, gts = [], []
    with torch.inference_mode():
        for start in range(0, len(pairs), batch_size):
            chunk = pairs[start : start + batch_size]
            images, masks = [], []
            for image, mask in chunk:
                image, mask = resize_pair(image, mask, resize)
                images.append(normalize_image(image))
                masks.append(mask)
            logits = network(torch.stack(images))
            probs = torch.sigmoid(logits)[:, 0]
            binary = (probs >= threshold).to(torch.uint8).numpy()
            preds.extend(binary)
            gts.extend(masks)
    return compute_micro_metrics(preds, gts)


def train(
    config: TrainConfig,
    train_pairs,
    val_pairs,
    run_dir: Path | str,
) -> TrainResult:
    """Run the full protocol; returns the trained network and run records.

    `train_pairs` / `val_pairs` are sequences of (image, mask) arrays:
    float32 HxWx3 in [0,1] and uint8 HxW in {0,1}. The run directory
    receives config.snapshot, log.ndjson, ckpt_best and ckpt_last.
    """
    train_pairs = list(train_pairs)
    val_pairs = list(val_pairs)
    if not train_pairs:
        raise ValueError("training split is empty")
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(config.seed)
    network = build_model(config.variant, seed=config.seed)
    if config.init_weights:
        load_weights(network, config.init_weights)

    (run_dir / "config.snapshot").write_text(_config_snapshot(config))

    optimizer = torch.optim.AdamW(
        network.parameters(), lr=config.lr0, betas=config.betas,
        eps=1e-8, weight_decay=config.weight_decay,
    )
    sched = SchedulerState(current_lr=config.lr0)

    records: list[dict] = []
    step_losses: list[float] = []
    best: Checkpoint | None = None
    steps_done = 0
    log_path = run_dir / "log.ndjson"

    if config.epochs == 0:
        save_weights(network, run_dir / "ckpt_last",
                     provenance={"epoch": 0, "steps": 0})
        log_path.write_text("")
        return TrainResult(run_dir, network, records, step_losses, None)

    with log_path.open("w") as log:
        for epoch in range(1, config.epochs + 1):
            network.train()
            order = np.random.default_rng([config.seed, epoch]).permutation(
                len(train_pairs)
            )
            epoch_losses = []
            for start in range(0, len(order), config.batch_size):
                if config.max_steps is not None and steps_done >= config.max_steps:
                    break
                batch_idx = order[start : start + config.batch_size]
                images, masks = _batch_tensors(train_pairs, batch_idx, config, epoch)
                optimizer.zero_grad()
                logits = network(images)
                loss = bce_loss(logits, masks)
                if not torch.isfinite(loss):
                    raise InferenceError(
                        f"non-finite loss at epoch {epoch} step {steps_done}; "
                        f"batch indices {batch_idx.tolist()}"
                    )
                loss.backward()
                optimizer.step()
                loss_value = float(loss.detach())
                epoch_losses.append(loss_value)
                step_losses.append(loss_value)
                steps_done += 1

            val_iou = val_dsc = None
            if val_pairs and epoch % config.val_interval == 0:
                report = evaluate(network, val_pairs, threshold=0.5,
                                  resize=config.resize,
                                  batch_size=config.batch_size)
                val_iou, val_dsc = report.iou, report.dsc
                sched = scheduler_step(
                    sched, val_dsc, factor=config.scheduler_factor,
                    patience=config.scheduler_patience, min_lr=config.min_lr,
                )
                for group in optimizer.param_groups:
                    group["lr"] = sched.current_lr
                if best is None or val_iou > best.val_iou:
                    path = save_weights(
                        network, run_dir / "ckpt_best",
                        provenance={"epoch": epoch, "val_iou": val_iou,
                                    "val_dsc": val_dsc, "lr": sched.current_lr},
                    )
                    best = Checkpoint(epoch, path, val_iou, val_dsc,
                                      sched.current_lr)

            record = {
                "epoch": epoch,
                "train_loss": float(np.mean(epoch_losses)) if epoch_losses else None,
                "val_iou": val_iou,
                "val_dsc": val_dsc,
                "lr": sched.current_lr,
            }
            records.append(record)
            log.write(json.dumps(record) + "\n")
            log.flush()

            if config.max_steps is not None and steps_done >= config.max_steps:
                break

    save_weights(network, run_dir / "ckpt_last",
                 provenance={"epoch": records[-1]["epoch"] if records else 0,
                             "steps": steps_done})
    network.eval()
    return TrainResult(run_dir, network, records, step_losses, best)


def _config_snapshot(config: TrainConfig) -> str:
    import yaml

    augment = None
    if config.augment is not None:
        augment = {
            "blur_kernel": config.augment.blur_kernel,
            "blur_sigma_range": list(config.augment.blur_sigma_range),
            "max_translate_frac": config.augment.max_translate_frac,
            "max_rotate_deg": config.augment.max_rotate_deg,
            "scale_range": list(config.augment.scale_range),
            "max_shear_deg": config.augment.max_shear_deg,
            "flip_prob": config.augment.flip_prob,
            "jitter_strengths": list(config.augment.jitter_strengths),
        }
    doc = {
        "model": {"variant": config.variant, "init_weights": config.init_weights},
        "data": {
            "root": config.data_root,
            "manifest": config.manifest,
            "resize": config.resize,
            "batch_size": config.batch_size,
        },
        "optimizer": {
            "lr0": config.lr0,
            "min_lr": config.min_lr,
            "weight_decay": config.weight_decay,
            "betas": list(config.betas),
            "epochs": config.epochs,
            "max_steps": config.max_steps,
        },
        "scheduler": {
            "factor": config.scheduler_factor,
            "patience": config.scheduler_patience,
            "val_interval": config.val_interval,
        },
        "augment": augment,
        "seed": config.seed,
    }
    return yaml.safe_dump(doc, sort_keys=False)
