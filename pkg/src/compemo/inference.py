"""Frame-level prediction: pyramid, three forward passes, fusion, gating."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .features import VideoFeatures
from .labels import CompoundLabel, CompoundSet, gate, va_signs
from .network import ModelParams, forward, sigmoid, softmax
from .pyramid import NUM_SCALES, build_pyramid, resolve_indices


def fuse(scores: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Elementwise mean of per-scale post-softmax score vectors."""
    arr = np.asarray(scores)
    if arr.ndim != 2:
        raise ValueError(f"expected a stack of score vectors, got shape {arr.shape}")
    return arr.mean(axis=0)


def fuse_va(preds: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Elementwise mean of per-scale VA-sign probabilities."""
    arr = np.asarray(preds)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected a stack of (valence, arousal) pairs, got {arr.shape}")
    return arr.mean(axis=0)


@dataclass(frozen=True)
class FramePrediction:
    label: CompoundLabel
    class_scores: np.ndarray  # fused (7,) probabilities
    va: np.ndarray            # fused (p_valence_pos, p_arousal_pos)


def _sequence_batch(video: VideoFeatures, frames: list[int]) -> np.ndarray:
    """Stacked fallback-resolved pyramid sequences, (len(frames)*3, 15, D)."""
    if not video.mask.any():
        raise DataError(f"clip {video.clip_id}: no detected face in any frame")
    seqs = []
    for t in frames:
        sample = build_pyramid(t, video.num_frames)
        for indices in sample.scales:
            seqs.append(video.features[resolve_indices(indices, video.mask)])
    return np.stack(seqs)


def _predict_frames(params: ModelParams, cset: CompoundSet,
                    video: VideoFeatures, frames: list[int],
                    threshold: float = 0.5, chunk: int = 512
                    ) -> list[FramePrediction]:
    seqs = _sequence_batch(video, frames)
    class_probs = np.empty((len(seqs), len(cset)))
    va_probs = np.empty((len(seqs), 2))
    for lo in range(0, len(seqs), chunk):
        out = forward(params, seqs[lo:lo + chunk])
        class_probs[lo:lo + chunk] = softmax(out.class_logits, axis=1)
        va_probs[lo:lo + chunk] = sigmoid(out.va_logits)
    predictions = []
    for i, _ in enumerate(frames):
        scores = fuse(class_probs[i * NUM_SCALES:(i + 1) * NUM_SCALES])
        va = fuse_va(va_probs[i * NUM_SCALES:(i + 1) * NUM_SCALES])
        signs = va_signs(va[0], va[1], threshold)
        predictions.append(FramePrediction(gate(scores, signs, cset), scores, va))
    return predictions


def predict_frame(params: ModelParams, cset: CompoundSet, video: VideoFeatures,
                  t: int, threshold: float = 0.5) -> FramePrediction:
    """Fused, gated prediction for a single frame."""
    return _predict_frames(params, cset, video, [t], threshold)[0]


def predict_video(params: ModelParams, cset: CompoundSet, video: VideoFeatures,
                  threshold: float = 0.5) -> list[FramePrediction]:
    """Per-frame predictions for every frame, in frame order."""
    return _predict_frames(params, cset, video,
                           list(range(video.num_frames)), threshold)


# --- prediction CSV -------------------------------------------------------

PREDICTION_HEADER = ["clip_id", "frame_index", "label_name"]


def write_predictions(rows: list[tuple[str, int, str]], path: str | Path) -> None:
    """CSV of (clip_id, frame_index, label_name), sorted."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for clip_id, t, name in sorted(rows):
            writer.writerow([clip_id, t, name])


def read_predictions(path: str | Path) -> list[tuple[str, int, str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PREDICTION_HEADER:
            raise DataError(f"{path}: bad header {header!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns")
            try:
                rows.append((row[0], int(row[1]), row[2]))
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad frame index {row[1]!r}") from None
    return rows
