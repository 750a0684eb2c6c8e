"""Per-video feature files.

One binary file per video, little-endian, bit-exact:

    magic "TLHN" | u32 version=1 | u32 N | u32 D |
    N*D float32 features (row-major) | N mask bytes (0/1)

The mask marks frames with a detected face; rows with mask 0 are
placeholders that inference replaces via temporal fallback.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

FEATURE_MAGIC = b"TLHN"
FEATURE_VERSION = 1
FEATURE_SUFFIX = ".feat"


@dataclass
class VideoFeatures:
    clip_id: str
    features: np.ndarray  # (N, D) float32
    mask: np.ndarray      # (N,) bool

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise DataError(f"clip {self.clip_id}: features must be a non-empty N x D matrix")
        if self.mask.shape != (self.features.shape[0],):
            raise DataError(f"clip {self.clip_id}: mask length {self.mask.shape} "
                            f"does not match {self.features.shape[0]} frames")
        if not np.isfinite(self.features).all():
            raise DataError(f"clip {self.clip_id}: non-finite feature values")

    @property
    def num_frames(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def write_features(video: VideoFeatures, path: str | Path) -> None:
    with open(path, "wb") as fh:
        n, d = video.features.shape
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<III", FEATURE_VERSION, n, d))
        fh.write(video.features.astype("<f4", copy=False).tobytes())
        fh.write(video.mask.astype(np.uint8).tobytes())


def read_features(path: str | Path, clip_id: str | None = None) -> VideoFeatures:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != FEATURE_MAGIC:
        raise DataError(f"{path}: not a feature file (bad magic)")
    version, n, d = struct.unpack_from("<III", raw, 4)
    if version != FEATURE_VERSION:
        raise DataError(f"{path}: unsupported feature file version {version}")
    expect = 16 + 4 * n * d + n
    if len(raw) != expect:
        raise DataError(f"{path}: truncated feature file ({len(raw)} bytes, want {expect})")
    feats = np.frombuffer(raw, dtype="<f4", count=n * d, offset=16).reshape(n, d)
    mask = np.frombuffer(raw, dtype=np.uint8, count=n, offset=16 + 4 * n * d)
    if not np.isin(mask, (0, 1)).all():
        raise DataError(f"{path}: mask bytes must be 0 or 1")
    return VideoFeatures(clip_id or path.stem, feats.copy(), mask.astype(bool))


class FeatureStore:
    """Directory of feature files, one `<clip_id>.feat` per video."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise DataError(f"feature directory not found: {self.root}")

    def clip_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob(f"*{FEATURE_SUFFIX}"))

    def path(self, clip_id: str) -> Path:
        return self.root / f"{clip_id}{FEATURE_SUFFIX}"

    def load(self, clip_id: str) -> VideoFeatures:
        path = self.path(clip_id)
        if not path.is_file():
            raise DataError(f"missing feature file for clip {clip_id}: {path}")
        return read_features(path, clip_id)
