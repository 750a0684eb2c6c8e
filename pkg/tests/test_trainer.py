import numpy as np
import pytest

from compemo.curation import TrainingManifest
from compemo.errors import DataError
from compemo.features import FeatureStore, VideoFeatures, write_features
from compemo.labels import DEFAULT_COMPOUND_SET, BasicEmotion
from compemo.curation import ManifestEntry
from compemo.network import tensor_names
from compemo.trainer import (TrainConfig, anchor_frames, evaluate_items,
                             expand_samples, train, write_metrics)

CSET = DEFAULT_COMPOUND_SET


def make_store(tmp_path, clips):
    root = tmp_path / "features"
    root.mkdir()
    rng = np.random.default_rng(0)
    for clip_id, n in clips:
        video = VideoFeatures(clip_id, rng.normal(0, 1, (n, 6)).astype(np.float32),
                              np.ones(n, bool))
        write_features(video, root / f"{clip_id}.feat")
    return FeatureStore(root)


def manifest_of(entries):
    return TrainingManifest(compound_set=CSET, entries=entries)


class TestExpandSamples:
    def test_three_items_per_anchor(self, tmp_path):
        store = make_store(tmp_path, [("c1", 20)])
        manifest = manifest_of([ManifestEntry("c1", CSET[0], va=(-1, 1))])
        items = expand_samples(manifest, store)
        assert len(items) == 3
        assert [it.scale for it in items] == ["local", "quarter", "global"]
        assert all(it.class_idx == 0 and it.va == (-1, 1) for it in items)
        assert all(it.seq.shape == (15, 6) for it in items)

    def test_va_only_entries_drop_class_target(self, tmp_path):
        store = make_store(tmp_path, [("s1", 16)])
        manifest = manifest_of([ManifestEntry(
            "s1", BasicEmotion.SADNESS, va=(-1, -1), va_only=True)])
        items = expand_samples(manifest, store)
        assert all(it.class_idx == -1 for it in items)
        assert all(it.va == (-1, -1) for it in items)

    def test_item_count_multiplies(self, tmp_path):
        store = make_store(tmp_path, [("c1", 20), ("c2", 31)])
        manifest = manifest_of([
            ManifestEntry("c1", CSET[1], va=(1, 1)),
            ManifestEntry("c2", CSET[2], va=(-1, 0)),
        ])
        assert len(expand_samples(manifest, store, anchors=2)) == 12

    def test_missing_feature_file_names_clip(self, tmp_path):
        store = make_store(tmp_path, [("c1", 20)])
        manifest = manifest_of([ManifestEntry("ghost", CSET[0], va=None)])
        with pytest.raises(DataError, match="ghost"):
            expand_samples(manifest, store)

    def test_anchor_policy(self):
        assert anchor_frames(21, 1) == [10]
        assert anchor_frames(20, 3) == [0, 10, 19]


class TestTrain:
    def test_reaches_high_accuracy_on_separable_data(self, mini_model):
        params, metrics = mini_model
        assert metrics[-1].split == "final"
        assert metrics[-1].accuracy >= 0.95
        assert metrics[-2].loss < metrics[0].loss

    def test_fixed_seed_reproduces_parameters(self, mini_corpus, mini_manifest,
                                              mini_model):
        from tests.conftest import MINI_TRAIN
        store = FeatureStore(mini_corpus / "train" / "features")
        again, again_metrics = train(MINI_TRAIN, mini_manifest, store)
        params, metrics = mini_model
        for name in tensor_names(params.hyper):
            assert np.array_equal(params.tensors[name], again.tensors[name]), name
        assert metrics == again_metrics

    def test_empty_manifest_rejected(self, tmp_path):
        store = make_store(tmp_path, [("c1", 20)])
        with pytest.raises(DataError):
            train(TrainConfig(epochs=1), manifest_of([]), store)

    def test_config_validation(self):
        for bad in (dict(epochs=0), dict(batch_size=0), dict(lr=0.0),
                    dict(anchors=0)):
            with pytest.raises(ValueError):
                TrainConfig(**bad)

    def test_evaluate_items_chunking_consistent(self, tmp_path):
        store = make_store(tmp_path, [("c1", 25), ("c2", 18)])
        manifest = manifest_of([
            ManifestEntry("c1", CSET[0], va=(-1, 1)),
            ManifestEntry("c2", CSET[3], va=(-1, 1)),
        ])
        items = expand_samples(manifest, store, anchors=3)
        rng = np.random.default_rng(3)
        from compemo.network import HyperParams, init_params
        params = init_params(HyperParams(dim=6, width=16, layers=1, heads=4), rng)
        whole = evaluate_items(params, items, chunk=1000)
        pieces = evaluate_items(params, items, chunk=4)
        assert whole[1] == pieces[1]
        assert abs(whole[0] - pieces[0]) < 1e-9


class TestMetricsFile:
    def test_csv_layout(self, tmp_path, mini_model):
        _, metrics = mini_model
        path = tmp_path / "metrics.csv"
        write_metrics(metrics, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,split,loss,accuracy"
        assert len(lines) == len(metrics) + 1
        assert lines[-1].startswith(f"{metrics[-1].epoch},final,")
