"""Corruption diagnosis for tiny models via binary hyperdimensional computing."""

from .analysis import SsimMatrix, ssim, ssim_matrix, suggest_pruned_set
from .corruptions import KINDS, CidDataset, CorruptionSpec, Image, apply, build_cid_dataset
from .dataset import LabeledFeatureSet, read_feature_set, write_feature_set
from .encoding import ProjectionMatrix, encode, from_mlp_hidden, random_projection
from .errors import TrainingDivergedError, ValidationError
from .hdc import ClassBank, Prediction, classify, retrain_epochs, top_k_accuracy, train_single_pass
from .hypervec import (
    AccumulatorVector,
    Hypervector,
    accumulate,
    binarize,
    complement,
    hamming,
    hv_from_bipolar,
    hv_to_bipolar,
)
from .mlp import MlpModel, MlpShape, TrainConfig, hidden_features, hidden_weights, predict, train_mlp
from .modelfile import load_model, save_model
from .monitor import MonitorState, calibrate, step
from .pipeline import TapReport, build_hdc_datasets, tap_layer_search

__all__ = [
    "AccumulatorVector",
    "CidDataset",
    "ClassBank",
    "CorruptionSpec",
    "Hypervector",
    "Image",
    "KINDS",
    "LabeledFeatureSet",
    "MlpModel",
    "MlpShape",
    "MonitorState",
    "Prediction",
    "ProjectionMatrix",
    "SsimMatrix",
    "TapReport",
    "TrainConfig",
    "TrainingDivergedError",
    "ValidationError",
    "accumulate",
    "apply",
    "binarize",
    "build_cid_dataset",
    "build_hdc_datasets",
    "calibrate",
    "classify",
    "complement",
    "encode",
    "from_mlp_hidden",
    "hamming",
    "hidden_features",
    "hidden_weights",
    "hv_from_bipolar",
    "hv_to_bipolar",
    "load_model",
    "predict",
    "random_projection",
    "read_feature_set",
    "retrain_epochs",
    "save_model",
    "ssim",
    "ssim_matrix",
    "step",
    "suggest_pruned_set",
    "tap_layer_search",
    "top_k_accuracy",
    "train_mlp",
    "train_single_pass",
    "write_feature_set",
]
