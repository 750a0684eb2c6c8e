import pytest

from compemo.curation import build_manifest, read_votes_csv
from compemo.features import FeatureStore
from compemo.labels import DEFAULT_COMPOUND_SET
from compemo.synth import SynthConfig, generate
from compemo.trainer import TrainConfig, train

MINI_SYNTH = SynthConfig(seed=42, clips_per_class=6, eval_clips_per_class=2,
                         frames_min=18, frames_max=24, dim=12, margin=3.0,
                         mask_dropout=0.1)
MINI_TRAIN = TrainConfig(epochs=12, batch_size=32, lr=3e-3, seed=7,
                         width=32, layers=1, heads=4)


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Small separable synthetic corpus shared across test modules."""
    root = tmp_path_factory.mktemp("corpus")
    generate(MINI_SYNTH, root)
    return root


@pytest.fixture(scope="session")
def mini_manifest(mini_corpus):
    records = read_votes_csv(mini_corpus / "train" / "votes.csv")
    return build_manifest(records, DEFAULT_COMPOUND_SET)


@pytest.fixture(scope="session")
def mini_model(mini_corpus, mini_manifest):
    store = FeatureStore(mini_corpus / "train" / "features")
    params, metrics = train(MINI_TRAIN, mini_manifest, store)
    return params, metrics
