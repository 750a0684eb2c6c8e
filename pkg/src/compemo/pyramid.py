"""Temporal pyramid sampling.

Every target frame gets three 15-frame index sequences: a local window
starting at the frame, a resample of the quarter-video segment the frame
lives in, and a resample of the whole video. Frames without a detected
face are substituted by the temporally closest detected frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

SEQ_LEN = 15
NUM_SCALES = 3


@dataclass(frozen=True)
class PyramidSample:
    target: int
    local: tuple[int, ...]
    quarter: tuple[int, ...]
    global_: tuple[int, ...]

    @property
    def scales(self) -> tuple[tuple[int, ...], ...]:
        return (self.local, self.quarter, self.global_)


def uniform_sample(start: int, end_exclusive: int, length: int = SEQ_LEN) -> list[int]:
    """`length` indices spread linearly over [start, end_exclusive).

    idx_i = start + round(i * (span-1) / (length-1)) with round-half-up,
    so both endpoints are kept whenever the range has >= 2 frames.
    """
    if end_exclusive <= start:
        raise ValueError(f"empty range [{start}, {end_exclusive})")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if length == 1:
        return [start]
    span = end_exclusive - start
    return [start + round_half_up(i * (span - 1) / (length - 1)) for i in range(length)]


def round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def local_window(t: int, n: int, length: int = SEQ_LEN) -> list[int]:
    """`length` consecutive frames starting at t.

    Windows that would run past the video shift back to end at the last
    frame; videos shorter than the window repeat their last frame.
    """
    _check_frame(t, n)
    if n >= length:
        start = min(t, n - length)
        return list(range(start, start + length))
    return list(range(n)) + [n - 1] * (length - n)


def quarter_window(t: int, n: int, length: int = SEQ_LEN) -> list[int]:
    """Resample of the quarter-video segment containing frame t.

    Segment boundaries are floor(q*n/4) for q = 0..4; t's segment is the
    unique non-empty one covering it, so short videos with empty leading
    segments still resolve.
    """
    _check_frame(t, n)
    bounds = [q * n // 4 for q in range(5)]
    for q in range(4):
        if bounds[q] <= t < bounds[q + 1]:
            return uniform_sample(bounds[q], bounds[q + 1], length)
    raise AssertionError("unreachable: segments partition [0, n)")


def global_window(n: int, length: int = SEQ_LEN) -> list[int]:
    """Resample of the entire video."""
    if n < 1:
        raise ValueError(f"need at least one frame, got {n}")
    return uniform_sample(0, n, length)


def build_pyramid(t: int, n: int, length: int = SEQ_LEN) -> PyramidSample:
    return PyramidSample(
        target=t,
        local=tuple(local_window(t, n, length)),
        quarter=tuple(quarter_window(t, n, length)),
        global_=tuple(global_window(n, length)),
    )


def face_fallback(mask: np.ndarray, t: int) -> int:
    """Index of the detected frame closest to t; ties go to the earlier frame."""
    mask = np.asarray(mask, dtype=bool)
    _check_frame(t, len(mask))
    if mask[t]:
        return t
    if not mask.any():
        raise DataError("no detected face in any frame")
    for d in range(1, len(mask)):
        if t - d >= 0 and mask[t - d]:
            return t - d
        if t + d < len(mask) and mask[t + d]:
            return t + d
    raise AssertionError("unreachable: mask has a detection")


def resolve_indices(indices, mask: np.ndarray) -> list[int]:
    """Apply face_fallback to every index of a sampled sequence."""
    return [face_fallback(mask, int(i)) for i in indices]


def _check_frame(t: int, n: int) -> None:
    if not 0 <= t < n:
        raise ValueError(f"frame index {t} outside [0, {n})")
