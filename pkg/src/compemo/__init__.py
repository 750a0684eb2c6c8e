"""Frame-level compound facial expression recognition pipeline."""

from .curation import (AnnotationRecord, BalanceConfig, TrainingManifest,
                       build_manifest, compound_from_votes, majority_single)
from .errors import ConfigError, DataError
from .evaluation import f1_per_class, macro_f1, score_files
from .features import FeatureStore, VideoFeatures, read_features, write_features
from .inference import fuse, fuse_va, predict_frame, predict_video
from .labels import (DEFAULT_COMPOUND_SET, BasicEmotion, CompoundLabel,
                     CompoundSet, basic_to_va, gate, va_signs)
from .network import (ForwardOutput, HyperParams, ModelParams, Targets,
                      backward, forward, init_params, load_checkpoint, loss,
                      save_checkpoint)
from .optim import AdamState, adam_step
from .pyramid import (PyramidSample, build_pyramid, face_fallback,
                      global_window, local_window, quarter_window,
                      uniform_sample)
from .trainer import TrainConfig, expand_samples, train
from .synth import SynthConfig, generate

__version__ = "0.1.0"
