"""Turning annotator vote tables into labeled training manifests.

Each clip carries 10 independent basic-emotion votes. A clip becomes a
compound training sample when both components of some active compound
class collected at least 3 votes; it becomes single-emotion material when
one emotion collected more than 6. Single-emotion clips are appended to
under-represented compound classes to balance the manifest.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataError
from .labels import (BasicEmotion, CompoundLabel, CompoundSet, basic_to_va,
                     compound_to_va)

log = logging.getLogger(__name__)

NUM_VOTES = 10
MAJORITY_MIN = 7   # "more than 6" annotators
COMPONENT_MIN = 3  # votes per compound component


@dataclass(frozen=True)
class AnnotationRecord:
    clip_id: str
    votes: tuple[BasicEmotion, ...]

    def __post_init__(self):
        if len(self.votes) != NUM_VOTES:
            raise DataError(
                f"clip {self.clip_id}: expected {NUM_VOTES} votes, got {len(self.votes)}")

    def counts(self) -> Counter:
        return Counter(self.votes)


@dataclass(frozen=True)
class ManifestEntry:
    clip_id: str
    label: CompoundLabel | BasicEmotion
    va: tuple[int, int] | None
    va_only: bool = False
    balances: str | None = None  # compound class a supplement was assigned to

    @property
    def label_kind(self) -> str:
        return "compound" if isinstance(self.label, CompoundLabel) else "basic"

    @property
    def label_name(self) -> str:
        return self.label.name if isinstance(self.label, CompoundLabel) else self.label.label


@dataclass
class TrainingManifest:
    compound_set: CompoundSet
    entries: list[ManifestEntry] = field(default_factory=list)

    def class_counts(self) -> Counter:
        return Counter(e.label.index for e in self.entries
                       if isinstance(e.label, CompoundLabel))


@dataclass(frozen=True)
class BalanceConfig:
    target_count: int = 0  # 0 disables single-emotion filling


def majority_single(record: AnnotationRecord) -> BasicEmotion | None:
    """The emotion holding more than 6 of the 10 votes, if any.

    At most one emotion can reach 7 votes, so the winner is unique.
    """
    emotion, count = record.counts().most_common(1)[0]
    return emotion if count >= MAJORITY_MIN else None


def compound_from_votes(record: AnnotationRecord,
                        cset: CompoundSet) -> CompoundLabel | None:
    """Best-supported compound whose both components got >= 3 votes.

    Among qualifying compounds the one with the highest summed component
    votes wins; ties break by compound-set order.
    """
    counts = record.counts()
    best: CompoundLabel | None = None
    best_votes = -1
    for label in cset:
        a, b = counts[label.first], counts[label.second]
        if a >= COMPONENT_MIN and b >= COMPONENT_MIN and a + b > best_votes:
            best, best_votes = label, a + b
    return best


def build_manifest(records: list[AnnotationRecord], cset: CompoundSet,
                   balance: BalanceConfig = BalanceConfig()) -> TrainingManifest:
    """Compound entries first, then single-emotion fills for deficient classes.

    Compound entries are sorted by clip_id. Classes that are present but
    below the balance target are then topped up, in set order, with unused
    majority-vote single-emotion clips whose emotion matches one of the
    class components; supplements train the VA head only. Classes with no
    compound entry at all are left alone.
    """
    if not records:
        raise DataError("no annotation records")
    ordered = sorted(records, key=lambda r: r.clip_id)
    if len({r.clip_id for r in ordered}) != len(ordered):
        raise DataError("duplicate clip_id in annotation records")

    manifest = TrainingManifest(compound_set=cset)
    singles: list[tuple[str, BasicEmotion]] = []
    for record in ordered:
        label = compound_from_votes(record, cset)
        if label is not None:
            manifest.entries.append(ManifestEntry(
                record.clip_id, label, va=compound_to_va(label)))
            continue
        single = majority_single(record)
        if single is not None:
            singles.append((record.clip_id, single))

    if not manifest.entries:
        log.warning("no clip qualified for any compound class; "
                    "manifest holds supplements only")

    counts = manifest.class_counts()
    used: set[str] = set()
    for label in cset:
        if counts[label.index] == 0:
            continue
        deficit = balance.target_count - counts[label.index]
        for clip_id, emotion in singles:
            if deficit <= 0:
                break
            if clip_id in used or not label.contains(emotion):
                continue
            manifest.entries.append(ManifestEntry(
                clip_id, emotion, va=basic_to_va(emotion),
                va_only=True, balances=label.name))
            used.add(clip_id)
            deficit -= 1
    return manifest


# --- file formats ---------------------------------------------------------

def read_votes_csv(path: str | Path) -> list[AnnotationRecord]:
    """Vote table: header `clip_id,v1,...,v10`, lowercase emotion names."""
    expected = ["clip_id"] + [f"v{i}" for i in range(1, NUM_VOTES + 1)]
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty vote table") from None
        if header != expected:
            raise DataError(f"{path}: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != NUM_VOTES + 1:
                raise DataError(
                    f"{path}:{lineno}: expected {NUM_VOTES} votes, got {len(row) - 1}")
            try:
                votes = tuple(BasicEmotion.parse(v) for v in row[1:])
            except ConfigError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            records.append(AnnotationRecord(row[0], votes))
    if not records:
        raise DataError(f"{path}: no vote rows")
    return records


def write_manifest(manifest: TrainingManifest, path: str | Path) -> None:
    """JSON-lines: a header carrying the compound set, then one entry per line."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"compound_set": manifest.compound_set.to_pairs()}) + "\n")
        for e in manifest.entries:
            fh.write(json.dumps({
                "clip_id": e.clip_id,
                "label": e.label_name,
                "label_kind": e.label_kind,
                "va": list(e.va) if e.va is not None else None,
                "va_only": e.va_only,
            }) + "\n")


def read_manifest(path: str | Path) -> TrainingManifest:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty manifest")
    try:
        header = json.loads(lines[0])
        cset = CompoundSet.from_pairs(header["compound_set"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: bad manifest header: {exc}") from None
    manifest = TrainingManifest(compound_set=cset)
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            label = (cset.by_name(obj["label"]) if obj["label_kind"] == "compound"
                     else BasicEmotion.parse(obj["label"]))
            va = tuple(obj["va"]) if obj["va"] is not None else None
            manifest.entries.append(ManifestEntry(
                obj["clip_id"], label, va=va, va_only=bool(obj["va_only"])))
        except (json.JSONDecodeError, KeyError, ConfigError) as exc:
            raise DataError(f"{path}:{lineno}: bad manifest entry: {exc}") from None
    return manifest
