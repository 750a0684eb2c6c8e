import numpy as np
import pytest

from compemo.errors import ConfigError
from compemo.labels import (DEFAULT_COMPOUND_SET, BasicEmotion, CompoundSet,
                            basic_to_va, compound_to_va, gate, va_signs)


def oracle_gate(scores, signs, cset):
    """Straight-line restatement of the decision rule, kept independent."""
    if signs == (+1, +1):
        for lab in cset:
            if {lab.first, lab.second} == {BasicEmotion.HAPPINESS, BasicEmotion.SURPRISE}:
                return lab.index
    elif signs == (-1, -1):
        best, best_score = None, None
        for lab in cset:
            if BasicEmotion.SADNESS in (lab.first, lab.second):
                if best_score is None or scores[lab.index] > best_score:
                    best, best_score = lab.index, scores[lab.index]
        return best
    best, best_score = None, None
    for i, s in enumerate(scores):
        if best_score is None or s > best_score:
            best, best_score = i, s
    return best


class TestBasicEmotion:
    def test_codes_are_stable(self):
        order = ["happiness", "sadness", "neutral", "anger", "surprise",
                 "disgust", "fear"]
        assert [e.label for e in BasicEmotion] == order
        assert [int(e) for e in BasicEmotion] == list(range(7))

    def test_parse_roundtrip(self):
        for e in BasicEmotion:
            assert BasicEmotion.parse(e.label) is e
        with pytest.raises(ConfigError):
            BasicEmotion.parse("boredom")


class TestWheel:
    def test_table(self):
        assert basic_to_va(BasicEmotion.HAPPINESS) == (+1, +1)
        assert basic_to_va(BasicEmotion.SURPRISE) == (0, +1)
        assert basic_to_va(BasicEmotion.FEAR) == (-1, +1)
        assert basic_to_va(BasicEmotion.ANGER) == (-1, +1)
        assert basic_to_va(BasicEmotion.DISGUST) == (-1, +1)
        assert basic_to_va(BasicEmotion.SADNESS) == (-1, -1)
        assert basic_to_va(BasicEmotion.NEUTRAL) == (0, 0)

    def test_compound_combination(self):
        cset = DEFAULT_COMPOUND_SET
        assert compound_to_va(cset.by_name("happiness_surprise")) == (+1, +1)
        assert compound_to_va(cset.by_name("fear_surprise")) == (-1, +1)
        # sadness and fear pull arousal in opposite directions: axis masked
        assert compound_to_va(cset.by_name("sadness_fear")) == (-1, 0)


class TestCompoundSet:
    def test_default_set_shape(self):
        cset = DEFAULT_COMPOUND_SET
        assert len(cset) == 7
        assert cset.names[cset.happiness_surprise_index] == "happiness_surprise"
        assert len(cset.sadness_indices) == 3
        assert all("sadness" in cset.names[i] for i in cset.sadness_indices)

    def test_serialization_roundtrip(self):
        again = CompoundSet.from_pairs(DEFAULT_COMPOUND_SET.to_pairs())
        assert again.names == DEFAULT_COMPOUND_SET.names

    def test_rejects_happiness_disgust(self):
        pairs = DEFAULT_COMPOUND_SET.to_pairs()
        pairs[0] = ["happiness", "disgust"]
        with pytest.raises(ConfigError):
            CompoundSet.from_pairs(pairs)

    def test_rejects_wrong_counts(self):
        with pytest.raises(ConfigError):
            CompoundSet.from_pairs(DEFAULT_COMPOUND_SET.to_pairs()[:6])
        pairs = DEFAULT_COMPOUND_SET.to_pairs()
        pairs[5] = ["anger", "fear"]  # drops a sadness member
        with pytest.raises(ConfigError):
            CompoundSet.from_pairs(pairs)


class TestVaSigns:
    def test_examples(self):
        assert va_signs(0.9, 0.8) == (+1, +1)
        assert va_signs(0.5, 0.5) == (-1, -1)  # boundary is negative
        assert va_signs(0.2, 0.7) == (-1, +1)

    def test_threshold_validation(self):
        for bad in (0.0, 1.0, -0.2, 3.0):
            with pytest.raises(ConfigError):
                va_signs(0.5, 0.5, threshold=bad)


class TestGate:
    def test_positive_positive_ignores_scores(self):
        scores = np.zeros(7)
        scores[5] = 0.9  # strong sadness compound
        label = gate(scores, (+1, +1))
        assert label.name == "happiness_surprise"

    def test_mixed_signs_plain_argmax(self):
        scores = np.full(7, 1 / 7)
        scores[3] += 0.01
        assert gate(scores, (-1, +1)).index == 3

    def test_negative_negative_restricts_to_sadness(self):
        cset = DEFAULT_COMPOUND_SET
        scores = np.array([0.5, 0.1, 0.05, 0.05, 0.05, 0.2, 0.05])
        label = gate(scores, (-1, -1), cset)
        assert label.name == "sadness_fear"
        assert label.contains(BasicEmotion.SADNESS)

    def test_agrees_with_oracle(self):
        rng = np.random.default_rng(42)
        cset = DEFAULT_COMPOUND_SET
        for signs in [(+1, +1), (+1, -1), (-1, +1), (-1, -1)]:
            for _ in range(500):
                scores = rng.random(7)
                assert gate(scores, signs, cset).index == \
                    oracle_gate(scores, signs, cset)

    def test_positive_positive_permutation_invariant(self):
        rng = np.random.default_rng(0)
        scores = rng.random(7)
        labels = {gate(scores[perm], (+1, +1)).index
                  for perm in [rng.permutation(7) for _ in range(20)]}
        assert labels == {DEFAULT_COMPOUND_SET.happiness_surprise_index}

    def test_ties_break_to_lowest_index(self):
        assert gate(np.ones(7), (-1, +1)).index == 0
        sad_lo = min(DEFAULT_COMPOUND_SET.sadness_indices)
        assert gate(np.ones(7), (-1, -1)).index == sad_lo

    def test_total_over_all_sign_combos(self):
        rng = np.random.default_rng(3)
        for signs in [(+1, +1), (+1, -1), (-1, +1), (-1, -1)]:
            label = gate(rng.random(7), signs)
            assert 0 <= label.index < 7
