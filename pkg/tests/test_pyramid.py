import numpy as np
import pytest

from compemo.errors import DataError
from compemo.pyramid import (SEQ_LEN, build_pyramid, face_fallback,
                             global_window, local_window, quarter_window,
                             resolve_indices, uniform_sample)


class TestUniformSample:
    def test_identity_when_range_matches_length(self):
        assert uniform_sample(0, 15, 15) == list(range(15))

    def test_spread_over_sixty(self):
        # round-half-up of i*59/14, brute-forced below
        expected = [0, 4, 8, 13, 17, 21, 25, 30, 34, 38, 42, 46, 51, 55, 59]
        assert uniform_sample(0, 60, 15) == expected
        brute = [int(np.floor(i * 59 / 14 + 0.5)) for i in range(15)]
        assert brute == expected

    def test_short_range_repeats_with_endpoints(self):
        got = uniform_sample(5, 8, 15)
        assert len(got) == 15
        assert set(got) <= {5, 6, 7}
        assert got[0] == 5 and got[-1] == 7
        assert got == sorted(got)

    def test_single_frame_and_length_one(self):
        assert uniform_sample(3, 4, 15) == [3] * 15
        assert uniform_sample(3, 9, 1) == [3]

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            uniform_sample(5, 5, 15)


class TestLocalWindow:
    def test_starts_at_current_frame(self):
        assert local_window(0, 30) == list(range(15))
        assert local_window(7, 60) == list(range(7, 22))

    def test_shifts_back_at_video_end(self):
        assert local_window(25, 30) == list(range(15, 30))
        assert local_window(29, 30) == list(range(15, 30))

    def test_short_video_pads_with_last_frame(self):
        assert local_window(2, 5) == [0, 1, 2, 3, 4] + [4] * 10

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            local_window(5, 5)


class TestQuarterWindow:
    def test_first_and_last_quarter(self):
        assert quarter_window(10, 60) == list(range(15))
        assert quarter_window(59, 60) == list(range(45, 60))

    def test_one_frame_quarter(self):
        assert quarter_window(0, 4) == [0] * 15

    def test_segment_contains_target_everywhere(self):
        for n in range(1, 201):
            bounds = [q * n // 4 for q in range(5)]
            for t in range(n):
                got = quarter_window(t, n)
                q = next(i for i in range(4) if bounds[i] <= t < bounds[i + 1])
                assert bounds[q] <= t < bounds[q + 1]
                assert min(got) >= bounds[q] and max(got) < bounds[q + 1]


class TestGlobalWindow:
    def test_examples(self):
        assert global_window(15) == list(range(15))
        assert global_window(60) == uniform_sample(0, 60, 15)
        assert global_window(1) == [0] * 15


class TestSweep:
    def test_exhaustive_shape_and_range(self):
        # every scale, every (n, t): length 15, in range, non-decreasing,
        # local window covers t for videos long enough to hold one
        for n in range(1, 201):
            glob = global_window(n)
            for t in range(n):
                sample = build_pyramid(t, n)
                assert sample.global_ == tuple(glob)
                for seq in sample.scales:
                    assert len(seq) == SEQ_LEN
                    assert all(0 <= i < n for i in seq)
                    assert list(seq) == sorted(seq)
                assert t in sample.local


class TestFaceFallback:
    def test_identity_when_detected(self):
        assert face_fallback([True, True, True], 1) == 1

    def test_nearest_detection_wins(self):
        assert face_fallback([True, False, False, True], 1) == 0
        assert face_fallback([True, False, False, True], 2) == 3

    def test_equidistant_tie_goes_earlier(self):
        assert face_fallback([True, False, True], 1) == 0

    def test_all_false_is_a_data_error(self):
        with pytest.raises(DataError):
            face_fallback([False, False], 1)

    def test_always_lands_on_detection(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n = int(rng.integers(1, 40))
            mask = rng.random(n) < 0.4
            if not mask.any():
                mask[int(rng.integers(n))] = True
            for t in range(n):
                i = face_fallback(mask, t)
                assert mask[i]
                if mask[t]:
                    assert i == t

    def test_resolve_maps_whole_sequences(self):
        mask = np.array([False, True, False, True, False])
        out = resolve_indices([0, 2, 4, 4], mask)
        assert out == [1, 1, 3, 3]
        assert all(mask[i] for i in out)
