import numpy as np
import pytest

from compemo.curation import build_manifest, read_votes_csv
from compemo.errors import ConfigError
from compemo.features import FeatureStore
from compemo.inference import read_predictions
from compemo.labels import DEFAULT_COMPOUND_SET
from compemo.synth import SynthConfig, generate

CSET = DEFAULT_COMPOUND_SET

SMALL = SynthConfig(seed=5, clips_per_class=2, eval_clips_per_class=1,
                    singles_per_emotion=1, frames_min=9, frames_max=14,
                    dim=14, margin=2.0, mask_dropout=0.2)


def tree_bytes(root):
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


class TestGenerate:
    def test_same_seed_same_bytes(self, tmp_path):
        generate(SMALL, tmp_path / "a")
        generate(SMALL, tmp_path / "b")
        a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
        assert a.keys() == b.keys()
        assert all(a[k] == b[k] for k in a)

    def test_different_seed_differs(self, tmp_path):
        generate(SMALL, tmp_path / "a")
        generate(SynthConfig(**{**SMALL.__dict__, "seed": 6}), tmp_path / "b")
        a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
        assert any(a[k] != b[k] for k in a if k.endswith(".feat"))

    def test_votes_curate_back_to_generated_labels(self, tmp_path):
        generate(SMALL, tmp_path)
        records = read_votes_csv(tmp_path / "train" / "votes.csv")
        manifest = build_manifest(records, CSET)
        compound = {e.clip_id: e.label.name for e in manifest.entries
                    if e.label_kind == "compound"}
        assert len(compound) == 2 * 7
        for clip_id, name in compound.items():
            assert clip_id == f"train_{name}_{clip_id[-3:]}"
        # single-emotion clips majority-vote back to their emotion
        singles = {r.clip_id for r in records} - set(compound)
        assert len(singles) == 7
        for r in records:
            if r.clip_id in singles:
                emotion, count = r.counts().most_common(1)[0]
                assert count == 8
                assert r.clip_id.startswith(f"train_single_{emotion.label}")

    def test_masks_have_detections_and_zero_rows(self, tmp_path):
        generate(SMALL, tmp_path)
        store = FeatureStore(tmp_path / "train" / "features")
        saw_dropout = False
        for clip_id in store.clip_ids():
            video = store.load(clip_id)
            assert video.mask.any()
            if not video.mask.all():
                saw_dropout = True
                assert np.all(video.features[~video.mask] == 0.0)
        assert saw_dropout

    def test_truth_covers_every_frame(self, tmp_path):
        generate(SMALL, tmp_path)
        store = FeatureStore(tmp_path / "eval" / "features")
        truth = read_predictions(tmp_path / "eval" / "truth.csv")
        total = sum(store.load(c).num_frames for c in store.clip_ids())
        assert len(truth) == total
        by_clip = {c: t for c, t, _ in truth}
        for clip_id in store.clip_ids():
            assert by_clip[clip_id] == store.load(clip_id).num_frames - 1

    def test_zero_margin_gives_near_chance_accuracy(self, tmp_path):
        # identical class distributions: nothing to learn
        from compemo.trainer import TrainConfig, train
        generate(SynthConfig(seed=11, clips_per_class=4, eval_clips_per_class=0,
                             frames_min=16, frames_max=16, dim=8, margin=0.0,
                             mask_dropout=0.0), tmp_path)
        records = read_votes_csv(tmp_path / "train" / "votes.csv")
        manifest = build_manifest(records, CSET)
        store = FeatureStore(tmp_path / "train" / "features")
        _, metrics = train(TrainConfig(epochs=3, batch_size=16, lr=3e-3,
                                       seed=0, width=16), manifest, store)
        assert metrics[-1].accuracy < 0.5  # chance is 1/7

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SynthConfig(dim=3)
        with pytest.raises(ConfigError):
            SynthConfig(singles_per_emotion=1, dim=12)
        with pytest.raises(ConfigError):
            SynthConfig(frames_min=10, frames_max=5)
        with pytest.raises(ConfigError):
            SynthConfig(mask_dropout=1.0)
