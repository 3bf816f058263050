"""Lightweight wound-segmentation toolkit.

Dataset curation with perceptual-hash deduplication, seven efficient
segmentation architectures with verifiable parameter budgets, the full
training and micro-averaged evaluation protocol, and a live streaming
inference service.
"""

from .phash import compute_phash, hamming_distance
from .corpus import (
    AnnotatedPair, DedupReport, DuplicateGroup, ImageSample, SplitManifest,
    binarize_mask, deduplicate, find_duplicates, load_corpus, make_splits,
)
from .augment import AugmentConfig, augment_pair, color_jitter, gaussian_blur
from .metrics import MetricsReport, compute_micro_metrics
from .models import Network, VARIANTS, build_model, count_parameters
from .training import (
    SchedulerState, TrainConfig, bce_loss, evaluate, scheduler_step, train,
)
from .weights import load_weights, save_weights
from .service import create_app, infer_file, predict_mask
from .preprocess import preprocess_frame

__version__ = "0.1.0"

__all__ = [
    "AnnotatedPair", "AugmentConfig", "DedupReport", "DuplicateGroup",
    "ImageSample", "MetricsReport", "Network", "SchedulerState",
    "SplitManifest", "TrainConfig", "VARIANTS", "augment_pair", "bce_loss",
    "binarize_mask", "build_model", "color_jitter", "compute_micro_metrics",
    "compute_phash", "count_parameters", "create_app", "deduplicate",
    "evaluate", "find_duplicates", "gaussian_blur", "hamming_distance",
    "infer_file", "load_corpus", "load_weights", "make_splits",
    "predict_mask", "preprocess_frame", "save_weights", "scheduler_step",
    "train",
]
