"""Label space: basic emotions, compound classes and the VA-sign decision rule.

The classifier works on 7 compound classes, each a pair of basic emotions.
A coarse valence/arousal stage can override or restrict the fine-grained
argmax: both-positive frames are forced to the happiness+surprise class,
both-negative frames choose only among the sadness-bearing classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError


class BasicEmotion(IntEnum):
    HAPPINESS = 0
    SADNESS = 1
    NEUTRAL = 2
    ANGER = 3
    SURPRISE = 4
    DISGUST = 5
    FEAR = 6

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, name: str) -> "BasicEmotion":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ConfigError(f"unknown basic emotion name: {name!r}") from None


# Sign of (valence, arousal) for each basic emotion on the emotion wheel.
# Only the quadrants of happiness (+,+) and sadness (-,-) drive gating;
# surprise sits on the valence axis and neutral at the origin.
WHEEL_SIGNS: dict[BasicEmotion, tuple[int, int]] = {
    BasicEmotion.HAPPINESS: (+1, +1),
    BasicEmotion.SURPRISE: (0, +1),
    BasicEmotion.FEAR: (-1, +1),
    BasicEmotion.ANGER: (-1, +1),
    BasicEmotion.DISGUST: (-1, +1),
    BasicEmotion.SADNESS: (-1, -1),
    BasicEmotion.NEUTRAL: (0, 0),
}


def basic_to_va(emotion: BasicEmotion) -> tuple[int, int]:
    """Wheel lookup: signs of (valence, arousal) for one basic emotion."""
    return WHEEL_SIGNS[emotion]


@dataclass(frozen=True)
class CompoundLabel:
    """One compound class: an ordered pair of distinct basic emotions."""

    first: BasicEmotion
    second: BasicEmotion
    index: int

    @property
    def name(self) -> str:
        return f"{self.first.label}_{self.second.label}"

    @property
    def components(self) -> frozenset[BasicEmotion]:
        return frozenset((self.first, self.second))

    def contains(self, emotion: BasicEmotion) -> bool:
        return emotion in (self.first, self.second)


class CompoundSet:
    """The active, ordered set of 7 compound classes.

    Validated on construction: pairs are distinct, happiness and disgust
    never co-occur, exactly one member combines happiness with surprise
    and exactly three carry a sadness component.
    """

    def __init__(self, pairs: Sequence[tuple[BasicEmotion, BasicEmotion]]):
        if len(pairs) != 7:
            raise ConfigError(f"compound set must have 7 members, got {len(pairs)}")
        labels = []
        for i, (a, b) in enumerate(pairs):
            if a == b:
                raise ConfigError(f"compound {i} repeats {a.label}")
            if {a, b} == {BasicEmotion.HAPPINESS, BasicEmotion.DISGUST}:
                raise ConfigError("happiness and disgust are mutually exclusive")
            labels.append(CompoundLabel(a, b, i))
        if len({lab.components for lab in labels}) != 7:
            raise ConfigError("compound set contains duplicate pairs")
        hs = [lab for lab in labels
              if lab.components == {BasicEmotion.HAPPINESS, BasicEmotion.SURPRISE}]
        if len(hs) != 1:
            raise ConfigError("exactly one compound must combine happiness and surprise")
        sad = [lab for lab in labels if lab.contains(BasicEmotion.SADNESS)]
        if len(sad) != 3:
            raise ConfigError(f"exactly three compounds must carry sadness, got {len(sad)}")
        self.labels: tuple[CompoundLabel, ...] = tuple(labels)
        self.happiness_surprise_index = hs[0].index
        self.sadness_indices = tuple(lab.index for lab in sad)
        self._by_name = {lab.name: lab for lab in labels}

    def __len__(self) -> int:
        return 7

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, index: int) -> CompoundLabel:
        return self.labels[index]

    def __eq__(self, other) -> bool:
        return isinstance(other, CompoundSet) and self.to_pairs() == other.to_pairs()

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(lab.name for lab in self.labels)

    def by_name(self, name: str) -> CompoundLabel:
        try:
            return self._by_name[name]
        except KeyError:
            raise ConfigError(f"unknown compound label name: {name!r}") from None

    def to_pairs(self) -> list[list[str]]:
        """Serializable form: ordered pairs of lowercase basic-emotion names."""
        return [[lab.first.label, lab.second.label] for lab in self.labels]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[str]]) -> "CompoundSet":
        return cls([(BasicEmotion.parse(a), BasicEmotion.parse(b)) for a, b in pairs])


# Default 7-class set: one happiness+surprise member, three sadness members,
# happiness and disgust never paired.
DEFAULT_COMPOUND_SET = CompoundSet([
    (BasicEmotion.FEAR, BasicEmotion.SURPRISE),
    (BasicEmotion.HAPPINESS, BasicEmotion.SURPRISE),
    (BasicEmotion.SADNESS, BasicEmotion.SURPRISE),
    (BasicEmotion.DISGUST, BasicEmotion.SURPRISE),
    (BasicEmotion.ANGER, BasicEmotion.SURPRISE),
    (BasicEmotion.SADNESS, BasicEmotion.FEAR),
    (BasicEmotion.SADNESS, BasicEmotion.ANGER),
])


def compound_to_va(label: CompoundLabel) -> tuple[int, int]:
    """Combined wheel signs of a compound's two components.

    Per axis: sign of the summed component signs, 0 when they cancel
    (0 marks the axis as unsupervised in training targets).
    """
    (v1, a1), (v2, a2) = basic_to_va(label.first), basic_to_va(label.second)
    return int(np.sign(v1 + v2)), int(np.sign(a1 + a2))


def va_signs(p_valence_pos: float, p_arousal_pos: float,
             threshold: float = 0.5) -> tuple[int, int]:
    """Binarize VA head probabilities: +1 iff strictly above threshold."""
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"va threshold must lie in (0,1), got {threshold}")
    return (+1 if p_valence_pos > threshold else -1,
            +1 if p_arousal_pos > threshold else -1)


def gate(scores: np.ndarray, signs: tuple[int, int],
         cset: CompoundSet = DEFAULT_COMPOUND_SET) -> CompoundLabel:
    """Hierarchical decision: VA signs first, class scores second.

    (+,+) forces the happiness+surprise class regardless of scores,
    (-,-) restricts the argmax to the sadness-bearing classes, any other
    sign combination falls through to the plain argmax. Ties break to the
    lowest class index.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (len(cset),):
        raise ConfigError(f"expected {len(cset)} scores, got shape {scores.shape}")
    if signs == (+1, +1):
        return cset[cset.happiness_surprise_index]
    if signs == (-1, -1):
        sad = cset.sadness_indices
        best = sad[int(np.argmax(scores[list(sad)]))]
        return cset[best]
    return cset[int(np.argmax(scores))]
