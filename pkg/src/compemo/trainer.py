"""Mini-batch training over pyramid-expanded manifest entries."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curation import ManifestEntry, TrainingManifest
from .errors import DataError
from .features import FeatureStore
from .labels import CompoundLabel
from .network import (ForwardOutput, HyperParams, ModelParams, Targets,
                      backward, forward, init_params, loss)
from .optim import DEFAULT_LR, AdamState, adam_step
from .pyramid import SEQ_LEN, build_pyramid, resolve_indices, uniform_sample

SCALE_NAMES = ("local", "quarter", "global")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 90
    lr: float = DEFAULT_LR
    seed: int = 0
    class_weight: float = 1.0
    va_weight: float = 1.0
    anchors: int = 1
    width: int = 64
    layers: int = 1
    heads: int = 4

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.lr <= 0 or self.anchors < 1:
            raise ValueError(f"bad training configuration: {self}")


@dataclass(frozen=True)
class TrainItem:
    clip_id: str
    scale: str
    anchor: int
    seq: np.ndarray      # (15, D) float32
    class_idx: int       # -1 when the item carries no class target
    va: tuple[int, int]  # 0 entries are unsupervised


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    split: str
    loss: float
    accuracy: float


def anchor_frames(num_frames: int, anchors: int) -> list[int]:
    """Default single anchor at the clip midpoint; k > 1 spreads uniformly."""
    if anchors == 1:
        return [num_frames // 2]
    return uniform_sample(0, num_frames, anchors)


def expand_samples(manifest: TrainingManifest, store: FeatureStore,
                   anchors: int = 1) -> list[TrainItem]:
    """Three sequences (local/quarter/global) per anchor per labeled clip."""
    items: list[TrainItem] = []
    for entry in manifest.entries:
        video = store.load(entry.clip_id)
        class_idx = (entry.label.index
                     if isinstance(entry.label, CompoundLabel) and not entry.va_only
                     else -1)
        va = entry.va if entry.va is not None else (0, 0)
        for t in anchor_frames(video.num_frames, anchors):
            sample = build_pyramid(t, video.num_frames)
            for scale_name, indices in zip(SCALE_NAMES, sample.scales):
                resolved = resolve_indices(indices, video.mask)
                items.append(TrainItem(
                    clip_id=entry.clip_id, scale=scale_name, anchor=t,
                    seq=video.features[resolved],
                    class_idx=class_idx, va=tuple(va)))
    return items


def _batch_targets(batch: list[TrainItem]) -> Targets:
    return Targets.build([it.class_idx for it in batch],
                         [it.va for it in batch])


def _batch_accuracy(out: ForwardOutput, targets: Targets) -> tuple[int, int]:
    has_class = targets.class_idx >= 0
    if not has_class.any():
        return 0, 0
    pred = out.class_logits[has_class].argmax(axis=1)
    return int((pred == targets.class_idx[has_class]).sum()), int(has_class.sum())


def train(config: TrainConfig, manifest: TrainingManifest, store: FeatureStore,
          ) -> tuple[ModelParams, list[EpochMetrics]]:
    """Seeded per-epoch shuffles, batch-mean gradients, Adam updates."""
    items = expand_samples(manifest, store, anchors=config.anchors)
    if not items:
        raise DataError("no training items after expansion")
    dims = {it.seq.shape[1] for it in items}
    if len(dims) != 1:
        raise DataError(f"inconsistent feature dimensions across clips: {sorted(dims)}")

    rng = np.random.default_rng(config.seed)
    hyper = HyperParams(dim=dims.pop(), width=config.width,
                        layers=config.layers, heads=config.heads, seq_len=SEQ_LEN)
    params = init_params(hyper, rng)
    state = AdamState()
    metrics: list[EpochMetrics] = []

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(items))
        loss_sum = 0.0
        correct = seen = 0
        for lo in range(0, len(order), config.batch_size):
            batch = [items[j] for j in order[lo:lo + config.batch_size]]
            seqs = np.stack([it.seq for it in batch])
            targets = _batch_targets(batch)
            out = forward(params, seqs)
            batch_loss = loss(out, targets, config.class_weight, config.va_weight)
            if not np.isfinite(batch_loss):
                ids = sorted({it.clip_id for it in batch})
                raise DataError(
                    f"non-finite loss at epoch {epoch}, batch {lo // config.batch_size}"
                    f" (clips {ids[:5]}...)")
            loss_sum += batch_loss * len(batch)
            c, s = _batch_accuracy(out, targets)
            correct, seen = correct + c, seen + s
            grads = backward(params, out, targets,
                             config.class_weight, config.va_weight)
            adam_step(params.tensors, grads, state, lr=config.lr)
        metrics.append(EpochMetrics(epoch, "train", loss_sum / len(items),
                                    correct / seen if seen else 0.0))

    final_loss, final_acc = evaluate_items(params, items,
                                           config.class_weight, config.va_weight)
    metrics.append(EpochMetrics(config.epochs, "final", final_loss, final_acc))
    return params, metrics


def evaluate_items(params: ModelParams, items: list[TrainItem],
                   class_weight: float = 1.0, va_weight: float = 1.0,
                   chunk: int = 256) -> tuple[float, float]:
    """Loss and class accuracy of fixed parameters over a full item list."""
    loss_sum = 0.0
    correct = seen = 0
    for lo in range(0, len(items), chunk):
        batch = items[lo:lo + chunk]
        out = forward(params, np.stack([it.seq for it in batch]))
        targets = _batch_targets(batch)
        loss_sum += loss(out, targets, class_weight, va_weight) * len(batch)
        c, s = _batch_accuracy(out, targets)
        correct, seen = correct + c, seen + s
    return loss_sum / len(items), correct / seen if seen else 0.0


def write_metrics(metrics: list[EpochMetrics], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "split", "loss", "accuracy"])
        for row in metrics:
            writer.writerow([row.epoch, row.split, repr(row.loss), repr(row.accuracy)])
