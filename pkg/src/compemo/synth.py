"""Seeded synthetic corpus generator for desk-scale end-to-end runs.

Every class gets a Gaussian feature cluster around its own direction; the
margin scales how far apart the cluster means sit. Vote tables are
generated to curate back to the intended labels, detection masks get
configurable dropout, and frame-level truth files allow scoring.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curation import NUM_VOTES
from .errors import ConfigError
from .features import VideoFeatures, write_features
from .inference import PREDICTION_HEADER
from .labels import BasicEmotion, CompoundSet, DEFAULT_COMPOUND_SET


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    clips_per_class: int = 30
    eval_clips_per_class: int = 4
    singles_per_emotion: int = 0
    frames_min: int = 24
    frames_max: int = 48
    dim: int = 16
    margin: float = 2.0
    mask_dropout: float = 0.1

    def __post_init__(self):
        if self.dim < 7:
            raise ConfigError("need at least 7 feature dimensions for 7 classes")
        if self.singles_per_emotion > 0 and self.dim < 14:
            raise ConfigError("single-emotion clips need at least 14 dimensions")
        if not 1 <= self.frames_min <= self.frames_max:
            raise ConfigError(f"bad frame range {self.frames_min}:{self.frames_max}")
        if not 0.0 <= self.mask_dropout < 1.0:
            raise ConfigError(f"mask dropout must lie in [0,1): {self.mask_dropout}")
        if min(self.clips_per_class, self.eval_clips_per_class) < 0 or self.margin < 0:
            raise ConfigError(f"bad synth configuration: {self}")


def class_directions(config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal directions: columns 0..6 for compounds, 7..13 for basics."""
    basis, _ = np.linalg.qr(rng.standard_normal((config.dim, config.dim)))
    return basis


def generate(config: SynthConfig, out_dir: str | Path,
             cset: CompoundSet = DEFAULT_COMPOUND_SET) -> None:
    out = Path(out_dir)
    rng = np.random.default_rng(config.seed)
    basis = class_directions(config, rng)
    compound_mean = {i: config.margin * basis[:, i] for i in range(len(cset))}
    basic_mean = {e: config.margin * basis[:, 7 + int(e)]
                  for e in BasicEmotion} if config.dim >= 14 else {}

    train_feat = out / "train" / "features"
    eval_feat = out / "eval" / "features"
    train_feat.mkdir(parents=True, exist_ok=True)
    eval_feat.mkdir(parents=True, exist_ok=True)

    votes: list[list[str]] = []
    train_truth: list[tuple[str, int, str]] = []
    eval_truth: list[tuple[str, int, str]] = []

    for label in cset:
        for j in range(config.clips_per_class):
            clip_id = f"train_{label.name}_{j:03d}"
            video = _make_clip(clip_id, compound_mean[label.index], config, rng)
            write_features(video, train_feat / f"{clip_id}.feat")
            votes.append([clip_id] + _compound_votes(label, rng))
            train_truth += [(clip_id, t, label.name) for t in range(video.num_frames)]
        for j in range(config.eval_clips_per_class):
            clip_id = f"eval_{label.name}_{j:03d}"
            video = _make_clip(clip_id, compound_mean[label.index], config, rng)
            write_features(video, eval_feat / f"{clip_id}.feat")
            eval_truth += [(clip_id, t, label.name) for t in range(video.num_frames)]

    for emotion in BasicEmotion:
        for j in range(config.singles_per_emotion):
            clip_id = f"train_single_{emotion.label}_{j:03d}"
            video = _make_clip(clip_id, basic_mean[emotion], config, rng)
            write_features(video, train_feat / f"{clip_id}.feat")
            votes.append([clip_id] + _single_votes(emotion, rng))

    _write_votes(votes, out / "train" / "votes.csv")
    _write_truth(train_truth, out / "train" / "truth.csv")
    _write_truth(eval_truth, out / "eval" / "truth.csv")


def _make_clip(clip_id: str, mean: np.ndarray, config: SynthConfig,
               rng: np.random.Generator) -> VideoFeatures:
    n = int(rng.integers(config.frames_min, config.frames_max + 1))
    features = mean + rng.standard_normal((n, config.dim))
    mask = rng.random(n) >= config.mask_dropout
    if not mask.any():
        mask[0] = True
    features[~mask] = 0.0  # undetected frames carry the zero vector
    return VideoFeatures(clip_id, features.astype(np.float32), mask)


def _compound_votes(label, rng: np.random.Generator) -> list[str]:
    """5/4/1 votes: both components clear 3, no rival compound qualifies."""
    rest = [e for e in BasicEmotion if not label.contains(e)]
    stray = rest[int(rng.integers(len(rest)))]
    ballot = [label.first] * 5 + [label.second] * 4 + [stray]
    return [ballot[i].label for i in rng.permutation(NUM_VOTES)]


def _single_votes(emotion: BasicEmotion, rng: np.random.Generator) -> list[str]:
    """8/2 votes: a clear majority, the stray pair stays below 3."""
    rest = [e for e in BasicEmotion if e != emotion]
    stray = rest[int(rng.integers(len(rest)))]
    ballot = [emotion] * 8 + [stray] * 2
    return [ballot[i].label for i in rng.permutation(NUM_VOTES)]


def _write_votes(rows: list[list[str]], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["clip_id"] + [f"v{i}" for i in range(1, NUM_VOTES + 1)])
        for row in sorted(rows):
            writer.writerow(row)


def _write_truth(rows: list[tuple[str, int, str]], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for clip_id, t, name in sorted(rows):
            writer.writerow([clip_id, t, name])
