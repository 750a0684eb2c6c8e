"""Frame-level scoring: per-class F1 and the 7-way macro average."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .inference import read_predictions
from .labels import CompoundSet, DEFAULT_COMPOUND_SET


def build_confusion(truth: list[int], pred: list[int],
                    num_classes: int = 7) -> np.ndarray:
    """Counts matrix, rows = truth, cols = prediction."""
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    for t, p in zip(truth, pred, strict=True):
        cm[t, p] += 1
    return cm


def f1_per_class(cm: np.ndarray, c: int) -> float:
    """2PR/(P+R) with precision over column c and recall over row c.

    Classes never predicted and never true score 0 and stay in the average.
    """
    tp = float(cm[c, c])
    col = float(cm[:, c].sum())
    row = float(cm[c, :].sum())
    precision = tp / col if col > 0 else 0.0
    recall = tp / row if row > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def macro_f1(cm: np.ndarray) -> float:
    """Unweighted mean of per-class F1 over every class, present or not."""
    k = cm.shape[0]
    return sum(f1_per_class(cm, c) for c in range(k)) / k


@dataclass
class EvalReport:
    macro_f1: float
    per_class: dict[str, float]
    confusion: np.ndarray
    frames: int

    def to_json(self) -> str:
        return json.dumps({
            "macro_f1": self.macro_f1,
            "per_class": self.per_class,
            "confusion": self.confusion.tolist(),
        }, indent=2)

    def to_text(self) -> str:
        width = max(len(n) for n in self.per_class)
        lines = [f"scored frames: {self.frames}", "per-class F1:"]
        lines += [f"  {name:<{width}}  {f1:.6f}" for name, f1 in self.per_class.items()]
        lines.append("confusion matrix (rows = truth, cols = prediction):")
        lines += ["  " + " ".join(f"{v:6d}" for v in row) for row in self.confusion]
        lines.append(f"macro_f1={self.macro_f1!r}")
        return "\n".join(lines)


def score_rows(pred_rows: list[tuple[str, int, str]],
               truth_rows: list[tuple[str, int, str]],
               cset: CompoundSet = DEFAULT_COMPOUND_SET) -> EvalReport:
    """Join predictions and truth on (clip_id, frame_index) and score."""
    pred_map = {(c, t): name for c, t, name in pred_rows}
    truth_map = {(c, t): name for c, t, name in truth_rows}
    if len(pred_map) != len(pred_rows):
        raise DataError("duplicate (clip_id, frame_index) keys in predictions")
    if len(truth_map) != len(truth_rows):
        raise DataError("duplicate (clip_id, frame_index) keys in truth")
    if pred_map.keys() != truth_map.keys():
        missing = sorted(truth_map.keys() - pred_map.keys())
        extra = sorted(pred_map.keys() - truth_map.keys())
        detail = []
        if missing:
            detail.append(f"missing from predictions: {missing[:10]}")
        if extra:
            detail.append(f"not in truth: {extra[:10]}")
        raise DataError("prediction/truth key mismatch; " + "; ".join(detail))

    index = {name: i for i, name in enumerate(cset.names)}
    truth_idx, pred_idx = [], []
    for key in truth_map:
        for name, out in ((truth_map[key], truth_idx), (pred_map[key], pred_idx)):
            if name not in index:
                raise DataError(f"unknown label name {name!r} at {key}")
            out.append(index[name])
    cm = build_confusion(truth_idx, pred_idx, len(cset))
    return EvalReport(
        macro_f1=macro_f1(cm),
        per_class={name: f1_per_class(cm, i) for i, name in enumerate(cset.names)},
        confusion=cm,
        frames=int(cm.sum()),
    )


def score_files(pred_csv: str | Path, truth_csv: str | Path,
                cset: CompoundSet = DEFAULT_COMPOUND_SET) -> EvalReport:
    return score_rows(read_predictions(pred_csv), read_predictions(truth_csv), cset)
